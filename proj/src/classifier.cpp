#include "gcf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gcf/errors.hpp"

namespace gcf {

std::vector<double> GraphModel::predict_batch(std::span<const LabeledGraph> graphs) {
    std::vector<double> out;
    out.reserve(graphs.size());
    for (const auto &g : graphs)
        out.push_back(predict(g));
    return out;
}

// ---------------------------------------------------------------------------

namespace {

class SubgraphMatcher {
public:
    SubgraphMatcher(const LabeledGraph &g, const LabeledGraph &p, bool labels)
        : g_(g), p_(p), labels_(labels), map_(p.node_count(), 0), used_(g.node_count(), 0) {
        // Pattern order: BFS-like, each next node adjacent to an earlier one when possible.
        const auto k = p.node_count();
        std::vector<char> placed(k, 0);
        for (std::size_t step = 0; step < k; ++step) {
            std::size_t pick = k;
            std::size_t best_links = 0;
            for (std::size_t v = 0; v < k; ++v) {
                if (placed[v])
                    continue;
                std::size_t links = 0;
                for (auto w : p.neighbors(static_cast<NodeId>(v)))
                    links += placed[w];
                if (pick == k || links > best_links) {
                    pick = v;
                    best_links = links;
                }
            }
            placed[pick] = 1;
            order_.push_back(static_cast<NodeId>(pick));
        }
    }

    bool run() { return p_.node_count() <= g_.node_count() && extend(0); }

private:
    const LabeledGraph &g_;
    const LabeledGraph &p_;
    bool labels_;
    std::vector<NodeId> order_;
    std::vector<NodeId> map_;
    std::vector<char> used_;

    bool extend(std::size_t depth) {
        if (depth == order_.size())
            return true;
        const NodeId u = order_[depth];
        for (NodeId w = 0; w < g_.node_count(); ++w) {
            if (used_[w] || g_.degree(w) < p_.degree(u))
                continue;
            if (labels_ && g_.label(w) != p_.label(u))
                continue;
            bool ok = true;
            for (std::size_t i = 0; i < depth && ok; ++i) {
                const NodeId x = order_[i];
                if (p_.has_edge(u, x))
                    ok = g_.has_edge(w, map_[x]);
            }
            if (!ok)
                continue;
            map_[u] = w;
            used_[w] = 1;
            if (extend(depth + 1))
                return true;
            used_[w] = 0;
        }
        return false;
    }
};

} // namespace

bool contains_subgraph(const LabeledGraph &g, const LabeledGraph &pattern, bool match_labels) {
    return SubgraphMatcher(g, pattern, match_labels).run();
}

MotifModel::MotifModel(std::string name, LabeledGraph pattern, bool match_labels)
    : name_(std::move(name)), pattern_(std::move(pattern)), match_labels_(match_labels) {}

std::unique_ptr<MotifModel> MotifModel::contains_triangle() {
    return std::make_unique<MotifModel>("contains-triangle", LabeledGraph({0, 0, 0}, {{0, 1}, {1, 2}, {0, 2}}),
                                        false);
}

std::unique_ptr<MotifModel> MotifModel::named(const std::string &name) {
    if (name == "contains-triangle")
        return contains_triangle();
    if (name == "contains-square")
        return std::make_unique<MotifModel>(name, LabeledGraph({0, 0, 0, 0}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}),
                                            false);
    if (name == "contains-star3")
        return std::make_unique<MotifModel>(name, LabeledGraph({0, 0, 0, 0}, {{0, 1}, {0, 2}, {0, 3}}), false);
    throw ConfigError("unknown built-in motif '" + name + "'");
}

double MotifModel::predict(const LabeledGraph &g) {
    if (name_ == "contains-triangle" && !match_labels_)
        return has_triangle(g) ? 1.0 : 0.0;
    return contains_subgraph(g, pattern_, match_labels_) ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t x) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= h >> 31;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 29;
    return h;
}

std::uint64_t hash_symbol(const std::string &s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

double sigmoid(double z) {
    if (z >= 0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

std::map<std::uint64_t, double> wl_features(const LabeledGraph &g, const LabelVocabulary &vocab, int rounds) {
    const auto n = g.node_count();
    std::vector<std::uint64_t> color(n), next(n);
    for (NodeId v = 0; v < n; ++v) {
        const auto l = g.label(v);
        color[v] = hash_symbol(l < vocab.size() ? vocab.symbol(l) : "#" + std::to_string(l));
    }
    std::map<std::uint64_t, double> features;
    std::vector<std::uint64_t> nb;
    for (int r = 0; r <= rounds; ++r) {
        for (NodeId v = 0; v < n; ++v)
            features[mix(static_cast<std::uint64_t>(r) + 1, color[v])] += 1.0;
        if (r == rounds)
            break;
        for (NodeId v = 0; v < n; ++v) {
            nb.clear();
            for (auto w : g.neighbors(v))
                nb.push_back(color[w]);
            std::sort(nb.begin(), nb.end());
            std::uint64_t h = mix(0x5157, color[v]);
            for (auto c : nb)
                h = mix(h, c);
            next[v] = h;
        }
        color.swap(next);
    }
    return features;
}

WlLinearModel::WlLinearModel(LabelVocabulary vocab, int rounds, double bias, std::map<std::uint64_t, double> weights)
    : vocab_(vocab), graph_vocab_(std::move(vocab)), rounds_(rounds), bias_(bias), weights_(std::move(weights)) {
    if (rounds_ < 0)
        throw ConfigError("WL rounds must be non-negative");
}

WlLinearModel WlLinearModel::train(std::span<const LabeledGraph> graphs, std::span<const int> labels,
                                   const LabelVocabulary &vocab, const TrainingOptions &opts) {
    if (graphs.size() != labels.size())
        throw ConfigError("graphs and labels differ in length");
    if (graphs.empty())
        throw ConfigError("empty training set");
    const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
    const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has0 || !has1)
        throw ConfigError("training set must contain both classes");

    // Sparse design matrix over a sorted feature index.
    std::vector<std::map<std::uint64_t, double>> raw;
    raw.reserve(graphs.size());
    std::map<std::uint64_t, std::size_t> index;
    for (const auto &g : graphs) {
        raw.push_back(wl_features(g, vocab, opts.rounds));
        for (const auto &[f, c] : raw.back())
            index.emplace(f, 0);
    }
    std::size_t next = 0;
    for (auto &[f, i] : index)
        i = next++;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(graphs.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        for (const auto &[f, c] : raw[i])
            rows[i].emplace_back(index[f], std::log1p(c));

    std::vector<double> w(index.size(), 0.0), grad(index.size());
    double b = 0.0;
    const double inv_n = 1.0 / static_cast<double>(graphs.size());
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double gb = 0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double z = b;
            for (auto [j, x] : rows[i])
                z += w[j] * x;
            const double err = sigmoid(z) - static_cast<double>(labels[i]);
            gb += err;
            for (auto [j, x] : rows[i])
                grad[j] += err * x;
        }
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] -= opts.learning_rate * (grad[j] * inv_n + opts.l2 * w[j]);
        b -= opts.learning_rate * gb * inv_n;
    }
    std::map<std::uint64_t, double> weights;
    for (const auto &[f, j] : index)
        if (w[j] != 0.0)
            weights.emplace(f, w[j]);
    return WlLinearModel(vocab, opts.rounds, b, std::move(weights));
}

double WlLinearModel::predict(const LabeledGraph &g) {
    double z = bias_;
    for (const auto &[f, c] : wl_features(g, graph_vocab_, rounds_)) {
        auto it = weights_.find(f);
        if (it != weights_.end())
            z += it->second * std::log1p(c);
    }
    return sigmoid(z);
}

std::string WlLinearModel::to_text() const {
    nlohmann::ordered_json j;
    j["v"] = 1;
    j["kind"] = "wl-linear";
    j["rounds"] = rounds_;
    j["labels"] = vocab_.symbols();
    j["bias"] = bias_;
    auto arr = nlohmann::json::array();
    for (const auto &[f, w] : weights_) {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f));
        arr.push_back({buf, w});
    }
    j["weights"] = std::move(arr);
    return j.dump(1) + "\n";
}

WlLinearModel WlLinearModel::from_text(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        if (j.at("v").get<int>() != 1 || j.at("kind").get<std::string>() != "wl-linear")
            throw ParseError("model", 0, "unsupported model file");
        std::map<std::uint64_t, double> weights;
        for (const auto &entry : j.at("weights")) {
            const auto hex = entry.at(0).get<std::string>();
            weights.emplace(std::stoull(hex, nullptr, 16), entry.at(1).get<double>());
        }
        return WlLinearModel(LabelVocabulary(j.at("labels").get<std::vector<std::string>>()),
                             j.at("rounds").get<int>(), j.at("bias").get<double>(), std::move(weights));
    } catch (const nlohmann::json::exception &e) {
        throw ParseError("model", 0, e.what());
    } catch (const std::invalid_argument &e) {
        throw ParseError("model", 0, e.what());
    }
}

void WlLinearModel::save(const std::string &path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    out << to_text();
}

WlLinearModel WlLinearModel::load(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(path, 0, "cannot open model file");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

// ---------------------------------------------------------------------------

Classifier::Classifier(std::shared_ptr<GraphModel> model, int desired_class, double threshold)
    : model_(std::move(model)), desired_class_(desired_class), threshold_(threshold) {
    if (!model_)
        throw ConfigError("classifier needs a model");
    if (desired_class_ != 0 && desired_class_ != 1)
        throw ConfigError("desired class must be 0 or 1");
    if (!(threshold_ >= 0.0 && threshold_ <= 1.0))
        throw ConfigError("decision threshold must lie in [0,1]");
    cache_enabled_ = model_->cacheable();
}

ClassifierVerdict Classifier::verdict_from_model_probability(double p_class1) const {
    if (!(p_class1 >= 0.0 && p_class1 <= 1.0))
        throw ProtocolError("model probability outside [0,1]");
    const double p = desired_class_ == 1 ? p_class1 : 1.0 - p_class1;
    return {p >= threshold_, p};
}

ClassifierVerdict Classifier::classify(const LabeledGraph &g) {
    if (!cache_enabled_) {
        if (model_->concurrent())
            return verdict_from_model_probability(model_->predict(g));
        std::lock_guard lock(mutex_);
        return verdict_from_model_probability(model_->predict(g));
    }
    auto key = canonical_key(g);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end())
            return it->second;
    }
    ClassifierVerdict v;
    try {
        if (model_->concurrent()) {
            v = verdict_from_model_probability(model_->predict(g));
        } else {
            std::lock_guard lock(mutex_);
            v = verdict_from_model_probability(model_->predict(g));
        }
    } catch (const TransportError &e) {
        if (!e.graph_key().empty())
            throw;
        throw TransportError(e.what(), key.hex());
    }
    std::lock_guard lock(mutex_);
    cache_.emplace(std::move(key), v);
    return v;
}

std::vector<ClassifierVerdict> Classifier::classify_batch(std::span<const LabeledGraph> graphs) {
    std::vector<ClassifierVerdict> out(graphs.size());
    if (graphs.empty())
        return out;
    std::vector<std::size_t> pending;
    std::vector<GraphKey> keys;
    if (cache_enabled_) {
        keys.reserve(graphs.size());
        std::lock_guard lock(mutex_);
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            keys.push_back(canonical_key(graphs[i]));
            if (auto it = cache_.find(keys.back()); it != cache_.end())
                out[i] = it->second;
            else
                pending.push_back(i);
        }
    } else {
        pending.resize(graphs.size());
        std::iota(pending.begin(), pending.end(), std::size_t{0});
    }
    if (pending.empty())
        return out;

    std::vector<LabeledGraph> batch;
    std::vector<double> probs;
    std::span<const LabeledGraph> view = graphs;
    if (pending.size() != graphs.size()) {
        batch.reserve(pending.size());
        for (auto i : pending)
            batch.push_back(graphs[i]);
        view = batch;
    }
    try {
        std::unique_lock lock(mutex_, std::defer_lock);
        if (!model_->concurrent())
            lock.lock();
        probs = model_->predict_batch(view);
    } catch (const TransportError &e) {
        if (!e.graph_key().empty() || view.empty())
            throw;
        throw TransportError(e.what(), canonical_key(view.front()).hex());
    }
    if (probs.size() != pending.size())
        throw ProtocolError("model returned a batch of the wrong size");
    std::vector<ClassifierVerdict> fresh;
    fresh.reserve(probs.size());
    for (double p : probs)
        fresh.push_back(verdict_from_model_probability(p));
    std::lock_guard lock(mutex_);
    for (std::size_t j = 0; j < pending.size(); ++j) {
        out[pending[j]] = fresh[j];
        if (cache_enabled_)
            cache_.emplace(keys[pending[j]], fresh[j]);
    }
    return out;
}

std::size_t Classifier::cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::string Classifier::describe() const {
    return model_->describe() + " desired=" + std::to_string(desired_class_);
}

} // namespace gcf
