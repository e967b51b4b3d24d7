#include "gcf/vrrw.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "gcf/errors.hpp"
#include "gcf/recourse.hpp"

namespace gcf {

std::string to_string(CoverageScope scope) { return scope == CoverageScope::top_n ? "top-n" : "all"; }

CoverageScope parse_coverage_scope(const std::string &text) {
    if (text == "top-n")
        return CoverageScope::top_n;
    if (text == "all")
        return CoverageScope::all;
    throw ConfigError("unknown coverage scope '" + text + "' (expected top-n or all)");
}

std::vector<TopRanked::Change> TopRanked::update(const GraphKey &key, std::uint64_t old_count,
                                                 std::uint64_t new_count) {
    std::vector<Change> out;
    bool was_top = false;
    if (old_count) {
        if (top_.erase({old_count, key}))
            was_top = true;
        else
            rest_.erase({old_count, key});
    }
    (was_top ? top_ : rest_).insert({new_count, key});
    rebalance(out);
    return out;
}

std::vector<TopRanked::Change> TopRanked::remove(const GraphKey &key, std::uint64_t count) {
    std::vector<Change> out;
    if (top_.erase({count, key}))
        out.push_back({key, false});
    else
        rest_.erase({count, key});
    rebalance(out);
    return out;
}

void TopRanked::rebalance(std::vector<Change> &out) {
    Order less;
    while (top_.size() < n_ && !rest_.empty()) {
        auto node = rest_.extract(rest_.begin());
        out.push_back({node.value().second, true});
        top_.insert(std::move(node));
    }
    while (!top_.empty() && !rest_.empty() && less(*rest_.begin(), *std::prev(top_.end()))) {
        auto up = rest_.extract(rest_.begin());
        auto down = top_.extract(std::prev(top_.end()));
        out.push_back({up.value().second, true});
        out.push_back({down.value().second, false});
        top_.insert(std::move(up));
        rest_.insert(std::move(down));
    }
}

std::string Ablations::name() const {
    std::string out;
    auto add = [&](bool on, const char *tag) {
        if (!on)
            return;
        if (!out.empty())
            out += "+";
        out += tag;
    };
    add(no_vertex_reinforcement, "NVR");
    add(no_importance, "NIF");
    add(no_dynamic_teleport, "NDT");
    return out.empty() ? "full" : out;
}

Ablations Ablations::parse(const std::string &text) {
    Ablations a;
    if (text.empty() || text == "full" || text == "none")
        return a;
    std::string token;
    std::istringstream in(text);
    auto take = [&](const std::string &t) {
        if (t == "NVR")
            a.no_vertex_reinforcement = true;
        else if (t == "NIF")
            a.no_importance = true;
        else if (t == "NDT")
            a.no_dynamic_teleport = true;
        else
            throw ConfigError("unknown ablation '" + t + "' (expected NVR, NIF or NDT)");
    };
    std::string cur;
    for (char c : text) {
        if (c == ',' || c == '+') {
            if (!cur.empty())
                take(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    if (!cur.empty())
        take(cur);
    return a;
}

void WalkConfig::validate(std::size_t inputs) const {
    if (!(tau >= 0.0 && tau <= 1.0))
        throw ConfigError("tau must lie in [0,1]");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError("alpha must lie in [0,1]");
    if (!(walk_theta >= 0.0) || !(eval_theta >= 0.0))
        throw ConfigError("theta must be non-negative");
    if (iterations == 0)
        throw ConfigError("iterations must be positive");
    if (candidate_pool && *candidate_pool == 0)
        throw ConfigError("candidate pool must be positive");
    if (sample_cap && *sample_cap == 0)
        throw ConfigError("sample cap must be at least 1");
    if (counter_capacity && *counter_capacity < pool_size(inputs))
        throw ConfigError("counter capacity must be at least the candidate pool size");
    if (workers == 0)
        throw ConfigError("workers must be positive");
}

double WalkStats::mean_degree() const {
    const auto moves = steps - teleports;
    return moves ? static_cast<double>(scored_neighbors) / static_cast<double>(moves) : 0.0;
}

double importance(double probability, std::span<const Distance> row, std::span<const std::uint32_t> cover_counts,
                  double theta, double alpha) {
    if (probability <= 0.0 || row.empty())
        return 0.0;
    std::size_t own = 0, fresh = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (!within_radius(row[i].value, theta))
            continue;
        ++own;
        fresh += cover_counts[i] == 0;
    }
    const double n = static_cast<double>(row.size());
    return probability * (alpha * static_cast<double>(own) / n + (1.0 - alpha) * static_cast<double>(fresh) / n);
}

std::vector<double> transition_probabilities(std::span<const double> importances,
                                             std::span<const std::uint64_t> visits, bool no_reinforcement) {
    std::vector<double> p(importances.size());
    double total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double n = no_reinforcement ? 1.0 : static_cast<double>(std::max<std::uint64_t>(visits[i], 1));
        p[i] = importances[i] * n;
        total += p[i];
    }
    if (!(total > 0)) {
        std::fill(p.begin(), p.end(), p.empty() ? 0.0 : 1.0 / static_cast<double>(p.size()));
        return p;
    }
    for (auto &x : p)
        x /= total;
    return p;
}

std::vector<double> teleport_probabilities(std::span<const std::uint32_t> cover_counts, bool uniform) {
    std::vector<double> p(cover_counts.size());
    if (p.empty())
        return p;
    if (uniform) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
        return p;
    }
    const auto least = *std::min_element(cover_counts.begin(), cover_counts.end());
    double total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(-static_cast<double>(cover_counts[i] - least));
        total += p[i];
    }
    for (auto &x : p)
        x /= total;
    return p;
}

// ---------------------------------------------------------------------------

WalkEngine::WalkEngine(std::vector<LabeledGraph> inputs, LabelVocabulary vocab, Classifier &classifier,
                       WalkConfig cfg, std::shared_ptr<const GraphDistance> distance)
    : inputs_(std::move(inputs)), vocab_(std::move(vocab)), labels_(vocab_.labels()), classifier_(classifier),
      cfg_(std::move(cfg)), distance_(distance ? std::move(distance) : std::make_shared<NormalizedGed>()),
      pool_(cfg_.workers) {
    if (inputs_.empty())
        throw ConfigError("no input graphs: nothing needs recourse");
    cfg_.validate(inputs_.size());
    for (const auto &g : inputs_)
        if (!is_connected(g))
            throw ConfigError("input graphs must be connected");
    input_verdicts_ = classifier_.classify_batch(inputs_);
    for (const auto &g : inputs_)
        input_profiles_.emplace_back(g);
    for (const auto &v : input_verdicts_)
        if (v.desired)
            throw ConfigError("input graphs must be classified into the undesired class");
    state_.visits = SpaceSavingCounter<GraphKey, GraphKeyHash>(cfg_.counter_capacity);
    state_.ranked = TopRanked(cfg_.pool_size(inputs_.size()));
    state_.cover_counts.assign(inputs_.size(), 0);
    state_.rng = Rng(cfg_.seed);
}

DistanceRow WalkEngine::compute_row(const LabeledGraph &g, double radius) const {
    DistanceRow row(inputs_.size());
    const GraphProfile profile(g);
    for (std::size_t i = 0; i < inputs_.size(); ++i)
        row[i] = distance_->distance_within_profiled(g, inputs_[i], radius, profile, input_profiles_[i]);
    return row;
}

void WalkEngine::remember_row(std::unordered_map<GraphKey, std::shared_ptr<const DistanceRow>, GraphKeyHash> &cache,
                              std::size_t capacity, const GraphKey &key, std::shared_ptr<const DistanceRow> row) {
    if (cache.size() >= capacity)
        cache.clear();
    cache.emplace(key, std::move(row));
}

std::shared_ptr<const DistanceRow> WalkEngine::row_for(const LabeledGraph &g, const GraphKey &key) {
    if (auto it = state_.candidates.find(key); it != state_.candidates.end())
        return it->second.row;
    if (auto it = candidate_rows_.find(key); it != candidate_rows_.end())
        return it->second;
    auto row = std::make_shared<const DistanceRow>(compute_row(g, cfg_.row_radius()));
    remember_row(candidate_rows_, cfg_.row_cache_capacity, key, row);
    return row;
}

void WalkEngine::start() {
    const auto i = uniform_index(state_.rng, inputs_.size());
    ScoredNeighbor s{EditOp{}, inputs_[i], input_verdicts_[i], std::nullopt, nullptr, false, 0, 0};
    visit(std::move(s));
}

std::vector<ScoredNeighbor> WalkEngine::score_neighborhood() {
    NeighborhoodConfig ncfg;
    ncfg.sample_cap = cfg_.sample_cap;
    ncfg.constraint = cfg_.constraint;
    ncfg.seed = cfg_.seed;
    auto nb = neighbors(*state_.current, labels_, ncfg, &state_.rng);

    std::vector<ScoredNeighbor> out;
    out.reserve(nb.size());
    for (auto &x : nb)
        out.push_back({x.op, std::move(x.graph), {}, std::nullopt, nullptr, false, 0, 0});
    const std::size_t n = out.size();
    if (n == 0)
        return out;

    if (classifier_.concurrent()) {
        pool_.parallel_for(n, [&](std::size_t i) { out[i].verdict = classifier_.classify(out[i].graph); });
    } else {
        std::vector<LabeledGraph> graphs;
        graphs.reserve(n);
        for (const auto &s : out)
            graphs.push_back(s.graph);
        auto verdicts = classifier_.classify_batch(graphs);
        for (std::size_t i = 0; i < n; ++i)
            out[i].verdict = verdicts[i];
    }

    const auto &ab = cfg_.ablations;
    const bool need_rows = !ab.no_importance;
    std::vector<char> fresh(n, 0);
    // Read-only access to the caches while workers run; new rows merge afterwards.
    pool_.parallel_for(n, [&](std::size_t i) {
        auto &s = out[i];
        const bool row_needed = need_rows && s.verdict.probability > 0.0;
        const bool key_needed = row_needed || (s.verdict.desired && !ab.no_vertex_reinforcement);
        if (!key_needed)
            return;
        s.key = canonical_key(s.graph);
        if (!row_needed)
            return;
        if (auto it = state_.candidates.find(*s.key); it != state_.candidates.end()) {
            s.row = it->second.row;
            s.candidate_row = true;
        } else if (auto ct = candidate_rows_.find(*s.key); ct != candidate_rows_.end()) {
            s.row = ct->second;
            s.candidate_row = true;
        } else if (auto wt = walk_rows_.find(*s.key); wt != walk_rows_.end()) {
            s.row = wt->second;
        } else {
            s.candidate_row = cfg_.walk_theta >= cfg_.row_radius();
            s.row = std::make_shared<const DistanceRow>(compute_row(s.graph, cfg_.walk_theta));
            fresh[i] = 1;
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        if (fresh[i])
            remember_row(out[i].candidate_row ? candidate_rows_ : walk_rows_, cfg_.row_cache_capacity, *out[i].key,
                         out[i].row);

    for (auto &s : out) {
        if (s.key && s.verdict.desired)
            s.visits = state_.visits.count(*s.key);
        if (ab.no_importance)
            s.importance = 1.0;
        else if (s.row)
            s.importance = importance(s.verdict.probability, *s.row, state_.cover_counts, cfg_.walk_theta,
                                      cfg_.alpha);
    }
    return out;
}

std::size_t WalkEngine::teleport_target() {
    auto p = teleport_probabilities(state_.cover_counts, cfg_.ablations.no_dynamic_teleport);
    return weighted_index(state_.rng, p);
}

ScoredNeighbor WalkEngine::transition() {
    auto teleport = [&] {
        ++state_.stats.teleports;
        const auto i = teleport_target();
        return ScoredNeighbor{EditOp{}, inputs_[i], input_verdicts_[i], std::nullopt, nullptr, false, 0, 0};
    };
    if (uniform01(state_.rng) < cfg_.tau)
        return teleport();
    auto scored = score_neighborhood();
    if (scored.empty()) {
        ++state_.stats.forced_teleports;
        return teleport();
    }
    state_.stats.scored_neighbors += scored.size();
    std::vector<double> imp(scored.size());
    std::vector<std::uint64_t> visits(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        imp[i] = scored[i].importance;
        visits[i] = scored[i].visits;
    }
    auto p = transition_probabilities(imp, visits, cfg_.ablations.no_vertex_reinforcement);
    double total = 0;
    for (std::size_t i = 0; i < imp.size(); ++i)
        total += imp[i];
    if (!(total > 0))
        ++state_.stats.uniform_fallbacks;
    return std::move(scored[weighted_index(state_.rng, p)]);
}

void WalkEngine::add_coverage(const DistanceRow &row, int sign) {
    for (std::size_t i = 0; i < row.size(); ++i)
        if (within_radius(row[i].value, cfg_.walk_theta))
            state_.cover_counts[i] = static_cast<std::uint32_t>(static_cast<int>(state_.cover_counts[i]) + sign);
}

void WalkEngine::apply_changes(const std::vector<TopRanked::Change> &changes) {
    for (const auto &c : changes)
        add_coverage(*state_.candidates.at(c.key).row, c.entered ? +1 : -1);
}

void WalkEngine::visit(ScoredNeighbor target) {
    if (target.verdict.desired) {
        GraphKey key = target.key ? std::move(*target.key) : canonical_key(target.graph);
        std::shared_ptr<const DistanceRow> row;
        if (target.row && target.candidate_row)
            row = std::move(target.row);
        reinforce(key, target.graph, std::move(row));
    }
    state_.current = std::move(target.graph);
}

void WalkEngine::reinforce(const GraphKey &key, const LabeledGraph &graph, std::shared_ptr<const DistanceRow> row) {
    const bool top_n = cfg_.coverage_scope == CoverageScope::top_n;
    const auto before = state_.visits.count(key);
    auto inc = state_.visits.increment(key);
    ++state_.stats.reinforced_visits;
    if (inc.evicted) {
        auto it = state_.candidates.find(*inc.evicted);
        if (top_n) {
            // The evicted key's count equals the new key's count minus one.
            apply_changes(state_.ranked.remove(*inc.evicted, inc.count - 1));
        } else {
            add_coverage(*it->second.row, -1);
        }
        state_.candidates.erase(it);
        ++state_.stats.evictions;
    }
    if (inc.inserted) {
        if (!row)
            row = row_for(graph, key);
        if (!top_n)
            add_coverage(*row, +1);
        state_.candidates.emplace(key, CandidateEntry{graph, std::move(row)});
    }
    if (top_n)
        apply_changes(state_.ranked.update(key, inc.inserted ? 0 : before, inc.count));
}

void WalkEngine::step() {
    if (!state_.current)
        start();
    visit(transition());
    ++state_.step;
    ++state_.stats.steps;
}

void WalkEngine::run(std::size_t iterations, const std::function<void(const WalkEngine &)> &observer,
                     std::size_t every) {
    if (!state_.current)
        start();
    while (state_.step < iterations) {
        step();
        if (observer && every && state_.step % every == 0)
            observer(*this);
    }
}

CandidateSet WalkEngine::run_to_completion() {
    run(cfg_.iterations);
    return candidates();
}

CandidateSet WalkEngine::candidates() const {
    CandidateSet set;
    for (auto &[key, entry] : state_.visits.top(cfg_.pool_size(inputs_.size()))) {
        const auto &c = state_.candidates.at(key);
        set.items.push_back({key, c.graph, entry.count, *c.row});
    }
    return set;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json graph_json(const LabeledGraph &g, const LabelVocabulary &vocab) {
    nlohmann::ordered_json j;
    auto nodes = nlohmann::ordered_json::array();
    for (auto l : g.labels())
        nodes.push_back(vocab.symbol(l));
    auto edges = nlohmann::ordered_json::array();
    for (auto [u, v] : g.edges())
        edges.push_back({u, v});
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    return j;
}

LabeledGraph graph_from_json(const nlohmann::json &j, const LabelVocabulary &vocab) {
    std::vector<Label> labels;
    for (const auto &s : j.at("nodes"))
        labels.push_back(vocab.find(s.get<std::string>()));
    std::vector<Edge> edges;
    for (const auto &e : j.at("edges"))
        edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
    return LabeledGraph(std::move(labels), std::move(edges));
}

} // namespace

std::string WalkEngine::checkpoint() const {
    nlohmann::ordered_json j;
    j["v"] = 1;
    j["kind"] = "gcf-walk";
    j["inputs"] = inputs_.size();
    j["variant"] = cfg_.ablations.name();
    j["scope"] = to_string(cfg_.coverage_scope);
    j["step"] = state_.step;
    j["rng"] = serialize_rng(state_.rng);
    if (state_.current)
        j["current"] = graph_json(*state_.current, vocab_);
    else
        j["current"] = nullptr;

    std::vector<std::pair<GraphKey, SpaceSavingCounter<GraphKey, GraphKeyHash>::Entry>> entries;
    state_.visits.for_each([&](const GraphKey &k, const auto &e) { entries.emplace_back(k, e); });
    std::sort(entries.begin(), entries.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
    auto arr = nlohmann::ordered_json::array();
    for (const auto &[k, e] : entries) {
        auto g = graph_json(state_.candidates.at(k).graph, vocab_);
        g["count"] = e.count;
        g["error"] = e.error;
        arr.push_back(std::move(g));
    }
    j["candidates"] = std::move(arr);
    j["cover_counts"] = state_.cover_counts;
    const auto &s = state_.stats;
    j["stats"] = {{"steps", s.steps},
                  {"teleports", s.teleports},
                  {"forced_teleports", s.forced_teleports},
                  {"uniform_fallbacks", s.uniform_fallbacks},
                  {"scored_neighbors", s.scored_neighbors},
                  {"reinforced_visits", s.reinforced_visits},
                  {"evictions", s.evictions}};
    return j.dump(1) + "\n";
}

void WalkEngine::restore(const std::string &text) {
    try {
        auto j = nlohmann::json::parse(text);
        if (j.at("v").get<int>() != 1 || j.at("kind").get<std::string>() != "gcf-walk")
            throw ParseError("checkpoint", 0, "unsupported checkpoint");
        if (j.at("inputs").get<std::size_t>() != inputs_.size())
            throw ParseError("checkpoint", 0, "checkpoint was taken for a different input set");
        if (j.at("variant").get<std::string>() != cfg_.ablations.name())
            throw ParseError("checkpoint", 0, "checkpoint was taken for a different variant");
        if (j.at("scope").get<std::string>() != to_string(cfg_.coverage_scope))
            throw ParseError("checkpoint", 0, "checkpoint was taken with a different coverage scope");
        WalkState st;
        st.visits = SpaceSavingCounter<GraphKey, GraphKeyHash>(cfg_.counter_capacity);
        st.ranked = TopRanked(cfg_.pool_size(inputs_.size()));
        st.cover_counts.assign(inputs_.size(), 0);
        st.step = j.at("step").get<std::size_t>();
        st.rng = deserialize_rng(j.at("rng").get<std::string>());
        if (!j.at("current").is_null())
            st.current = graph_from_json(j.at("current"), vocab_);
        state_ = std::move(st);
        for (const auto &c : j.at("candidates")) {
            auto g = graph_from_json(c, vocab_);
            auto key = canonical_key(g);
            const auto count = c.at("count").get<std::uint64_t>();
            state_.visits.restore(key, {count, c.at("error").get<std::uint64_t>()});
            auto row = row_for(g, key);
            if (cfg_.coverage_scope == CoverageScope::all)
                add_coverage(*row, +1);
            state_.candidates.emplace(key, CandidateEntry{std::move(g), std::move(row)});
            if (cfg_.coverage_scope == CoverageScope::top_n)
                apply_changes(state_.ranked.update(key, 0, count));
        }
        if (j.at("cover_counts").get<std::vector<std::uint32_t>>() != state_.cover_counts)
            throw ParseError("checkpoint", 0, "cover counts disagree with the stored candidates");
        const auto &s = j.at("stats");
        state_.stats.steps = s.at("steps").get<std::size_t>();
        state_.stats.teleports = s.at("teleports").get<std::size_t>();
        state_.stats.forced_teleports = s.at("forced_teleports").get<std::size_t>();
        state_.stats.uniform_fallbacks = s.at("uniform_fallbacks").get<std::size_t>();
        state_.stats.scored_neighbors = s.at("scored_neighbors").get<std::size_t>();
        state_.stats.reinforced_visits = s.at("reinforced_visits").get<std::size_t>();
        state_.stats.evictions = s.at("evictions").get<std::size_t>();
    } catch (const nlohmann::json::exception &e) {
        throw ParseError("checkpoint", 0, e.what());
    } catch (const std::out_of_range &e) {
        throw ParseError("checkpoint", 0, e.what());
    }
}

} // namespace gcf
