#include "gcf/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "gcf/errors.hpp"

namespace gcf {

LabeledGraph::LabeledGraph(std::vector<Label> labels, std::vector<Edge> edges)
    : labels_(std::move(labels)), edges_(std::move(edges)) {
    const auto n = labels_.size();
    if (n == 0)
        throw InvalidGraph("graph must have at least one node");
    for (auto &e : edges_) {
        if (e.first == e.second)
            throw InvalidGraph("self-loop on node " + std::to_string(e.first));
        if (e.first >= n || e.second >= n)
            throw InvalidGraph("edge endpoint out of range");
        e = make_edge(e.first, e.second);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw InvalidGraph("duplicate edge");

    offsets_.assign(n + 1, 0);
    for (auto [u, v] : edges_) {
        ++offsets_[u + 1];
        ++offsets_[v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adjacency_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (auto [u, v] : edges_) {
        adjacency_[fill[u]++] = v;
        adjacency_[fill[v]++] = u;
    }
    for (std::size_t v = 0; v < n; ++v)
        std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1]);
}

bool LabeledGraph::has_edge(NodeId u, NodeId v) const noexcept {
    if (u >= node_count() || v >= node_count())
        return false;
    if (degree(u) > degree(v))
        std::swap(u, v);
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

// ---------------------------------------------------------------------------

LabelVocabulary::LabelVocabulary(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    frequency_.assign(symbols_.size(), 0);
    for (std::size_t i = 0; i < symbols_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (symbols_[i] == symbols_[j])
                throw InvalidGraph("duplicate label symbol '" + symbols_[i] + "'");
}

Label LabelVocabulary::intern(const std::string &symbol) {
    auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
    if (it != symbols_.end())
        return static_cast<Label>(it - symbols_.begin());
    symbols_.push_back(symbol);
    frequency_.push_back(0);
    return static_cast<Label>(symbols_.size() - 1);
}

Label LabelVocabulary::find(const std::string &symbol) const {
    auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
    if (it == symbols_.end())
        throw std::out_of_range("unknown label symbol '" + symbol + "'");
    return static_cast<Label>(it - symbols_.begin());
}

bool LabelVocabulary::contains(const std::string &symbol) const {
    return std::find(symbols_.begin(), symbols_.end(), symbol) != symbols_.end();
}

void LabelVocabulary::set_frequencies(std::vector<std::size_t> freq) {
    if (freq.size() != symbols_.size())
        throw InvalidGraph("frequency vector size does not match vocabulary");
    frequency_ = std::move(freq);
}

std::vector<Label> LabelVocabulary::labels() const {
    std::vector<Label> out(symbols_.size());
    std::iota(out.begin(), out.end(), Label{0});
    return out;
}

std::string GraphKey::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

// ---------------------------------------------------------------------------

bool is_connected(const LabeledGraph &g) {
    const auto n = g.node_count();
    if (n == 0)
        return false;
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto w : g.neighbors(v))
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
    }
    return reached == n;
}

LabeledGraph permute(const LabeledGraph &g, std::span<const NodeId> perm) {
    if (perm.size() != g.node_count())
        throw InvalidGraph("permutation size mismatch");
    std::vector<Label> labels(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v)
        labels.at(perm[v]) = g.label(v);
    std::vector<Edge> edges;
    edges.reserve(g.edge_count());
    for (auto [u, v] : g.edges())
        edges.push_back(make_edge(perm[u], perm[v]));
    return LabeledGraph(std::move(labels), std::move(edges));
}

bool has_triangle(const LabeledGraph &g) {
    for (auto [u, v] : g.edges()) {
        auto a = g.neighbors(u);
        auto b = g.neighbors(v);
        auto i = a.begin();
        auto j = b.begin();
        while (i != a.end() && j != b.end()) {
            if (*i < *j)
                ++i;
            else if (*j < *i)
                ++j;
            else
                return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Canonical labeling: colour refinement + individualization search.

namespace {

using Colors = std::vector<std::uint32_t>;

class Canonizer {
public:
    explicit Canonizer(const LabeledGraph &g) : g_(g), n_(g.node_count()) { seed_twin_generators(); }

    std::vector<NodeId> run() {
        Colors colors(n_);
        // Initial partition by label rank.
        std::vector<Label> distinct(g_.labels().begin(), g_.labels().end());
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (NodeId v = 0; v < n_; ++v)
            colors[v] = static_cast<std::uint32_t>(
                std::lower_bound(distinct.begin(), distinct.end(), g_.label(v)) - distinct.begin());
        std::vector<NodeId> prefix;
        search(std::move(colors), static_cast<std::uint32_t>(distinct.size()), prefix);
        return best_pos_;
    }

    std::vector<std::uint32_t> take_form() { return std::move(best_form_); }

private:
    const LabeledGraph &g_;
    std::size_t n_;
    bool have_best_ = false;
    std::vector<std::uint32_t> best_form_;
    std::vector<NodeId> best_pos_;
    std::vector<std::vector<NodeId>> automorphisms_;

    // Swapping two twins (same label and same neighbourhood apart from each
    // other) is an automorphism; seeding those prunes cliques and stars early.
    void seed_twin_generators() {
        if (n_ < 2)
            return;
        auto mix = [](std::uint64_t x) {
            x ^= x >> 33;
            x *= 0xff51afd7ed558ccdULL;
            x ^= x >> 33;
            return x;
        };
        // Same label and N(u) - {v} == N(v) - {u}; `closed` additionally requires u ~ v.
        auto twins = [&](NodeId u, NodeId v, bool closed) {
            if (g_.label(u) != g_.label(v) || g_.has_edge(u, v) != closed)
                return false;
            auto a = g_.neighbors(u), b = g_.neighbors(v);
            std::size_t i = 0, j = 0;
            for (;;) {
                while (i < a.size() && a[i] == v)
                    ++i;
                while (j < b.size() && b[j] == u)
                    ++j;
                if (i == a.size() || j == b.size())
                    return i == a.size() && j == b.size();
                if (a[i++] != b[j++])
                    return false;
            }
        };
        std::vector<std::uint64_t> open_sig(n_);
        std::vector<NodeId> order(n_);
        for (int closed = 0; closed < 2; ++closed) {
            for (NodeId v = 0; v < n_; ++v) {
                std::uint64_t h = mix(g_.label(v) + 1) + g_.degree(v) * 0x9e3779b97f4a7c15ULL;
                for (auto w : g_.neighbors(v))
                    h += mix(w + 7);
                if (closed)
                    h += mix(v + 7);
                open_sig[v] = h;
            }
            std::iota(order.begin(), order.end(), NodeId{0});
            std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
                return open_sig[a] != open_sig[b] ? open_sig[a] < open_sig[b] : a < b;
            });
            for (std::size_t lo = 0; lo < n_;) {
                std::size_t hi = lo + 1;
                while (hi < n_ && open_sig[order[hi]] == open_sig[order[lo]])
                    ++hi;
                for (std::size_t i = lo + 1; i < hi; ++i)
                    for (std::size_t r = lo; r < i; ++r)
                        if (twins(order[r], order[i], closed)) {
                            std::vector<NodeId> perm(n_);
                            std::iota(perm.begin(), perm.end(), NodeId{0});
                            std::swap(perm[order[r]], perm[order[i]]);
                            automorphisms_.push_back(std::move(perm));
                            break;
                        }
                lo = hi;
            }
        }
    }

    std::uint32_t refine(Colors &colors, std::uint32_t ncolors) const {
        std::vector<std::vector<std::uint32_t>> sig(n_);
        std::vector<NodeId> order(n_);
        while (ncolors < n_) {
            for (NodeId v = 0; v < n_; ++v) {
                auto &s = sig[v];
                s.clear();
                s.push_back(colors[v]);
                for (auto w : g_.neighbors(v))
                    s.push_back(colors[w]);
                std::sort(s.begin() + 1, s.end());
            }
            std::iota(order.begin(), order.end(), NodeId{0});
            std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return sig[a] < sig[b]; });
            std::uint32_t rank = 0;
            Colors next(n_);
            for (std::size_t i = 0; i < n_; ++i) {
                if (i > 0 && sig[order[i]] != sig[order[i - 1]])
                    ++rank;
                next[order[i]] = rank;
            }
            const std::uint32_t count = n_ ? rank + 1 : 0;
            colors.swap(next);
            if (count == ncolors)
                break;
            ncolors = count;
        }
        return ncolors;
    }

    void leaf(const Colors &colors) {
        std::vector<std::uint32_t> form;
        form.reserve(2 + n_ + 2 * g_.edge_count());
        form.push_back(static_cast<std::uint32_t>(n_));
        form.push_back(static_cast<std::uint32_t>(g_.edge_count()));
        std::vector<Label> labels(n_);
        for (NodeId v = 0; v < n_; ++v)
            labels[colors[v]] = g_.label(v);
        form.insert(form.end(), labels.begin(), labels.end());
        std::vector<Edge> edges;
        edges.reserve(g_.edge_count());
        for (auto [u, v] : g_.edges())
            edges.push_back(make_edge(colors[u], colors[v]));
        std::sort(edges.begin(), edges.end());
        for (auto [u, v] : edges) {
            form.push_back(u);
            form.push_back(v);
        }
        if (!have_best_ || form < best_form_) {
            have_best_ = true;
            best_form_ = std::move(form);
            best_pos_.assign(colors.begin(), colors.end());
        } else if (form == best_form_) {
            // Both labelings produce the same graph: leaf -> best is an automorphism.
            std::vector<NodeId> at_pos(n_);
            for (NodeId v = 0; v < n_; ++v)
                at_pos[best_pos_[v]] = v;
            std::vector<NodeId> gamma(n_);
            for (NodeId v = 0; v < n_; ++v)
                gamma[v] = at_pos[colors[v]];
            automorphisms_.push_back(std::move(gamma));
        }
    }

    static NodeId find(std::vector<NodeId> &parent, NodeId x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }

    std::vector<NodeId> orbits_fixing(const std::vector<NodeId> &prefix) const {
        std::vector<NodeId> parent(n_);
        std::iota(parent.begin(), parent.end(), NodeId{0});
        for (const auto &gamma : automorphisms_) {
            bool fixes = std::all_of(prefix.begin(), prefix.end(), [&](NodeId p) { return gamma[p] == p; });
            if (!fixes)
                continue;
            for (NodeId v = 0; v < n_; ++v) {
                auto a = find(parent, v);
                auto b = find(parent, gamma[v]);
                if (a != b)
                    parent[std::max(a, b)] = std::min(a, b);
            }
        }
        return parent;
    }

    void search(Colors colors, std::uint32_t ncolors, std::vector<NodeId> &prefix) {
        ncolors = refine(colors, ncolors);
        if (ncolors == n_) {
            leaf(colors);
            return;
        }
        // Target cell: the lowest colour with more than one member.
        std::vector<std::uint32_t> size(ncolors, 0);
        for (auto c : colors)
            ++size[c];
        std::uint32_t target = 0;
        while (size[target] < 2)
            ++target;
        std::vector<NodeId> cell;
        for (NodeId v = 0; v < n_; ++v)
            if (colors[v] == target)
                cell.push_back(v);

        std::vector<NodeId> tried;
        for (auto v : cell) {
            if (!tried.empty()) {
                auto parent = orbits_fixing(prefix);
                auto root = find(parent, v);
                bool same_orbit = std::any_of(tried.begin(), tried.end(),
                                              [&](NodeId t) { return find(parent, t) == root; });
                if (same_orbit)
                    continue;
            }
            Colors next(colors);
            for (NodeId u = 0; u < n_; ++u) {
                if (colors[u] > target || (colors[u] == target && u != v))
                    ++next[u];
            }
            prefix.push_back(v);
            search(std::move(next), ncolors + 1, prefix);
            prefix.pop_back();
            tried.push_back(v);
        }
    }
};

std::uint64_t digest(const std::vector<std::uint32_t> &words) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto w : words) {
        for (int i = 0; i < 4; ++i) {
            h ^= (w >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ull;
        }
    }
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
}

} // namespace

std::vector<NodeId> canonical_order(const LabeledGraph &g) {
    Canonizer c(g);
    return c.run();
}

GraphKey canonical_key(const LabeledGraph &g) {
    Canonizer c(g);
    c.run();
    GraphKey key;
    key.form = c.take_form();
    key.hash = digest(key.form);
    return key;
}

// ---------------------------------------------------------------------------

namespace {

class IsoMatcher {
public:
    IsoMatcher(const LabeledGraph &a, const LabeledGraph &b) : a_(a), b_(b), n_(a.node_count()) {}

    bool run() {
        build_order();
        map_.assign(n_, kNone);
        used_.assign(n_, 0);
        return extend(0);
    }

private:
    static constexpr NodeId kNone = ~NodeId{0};
    const LabeledGraph &a_;
    const LabeledGraph &b_;
    std::size_t n_;
    std::vector<NodeId> order_;
    std::vector<NodeId> map_;
    std::vector<char> used_;

    // Greedy order: each next node has the most already-ordered neighbours.
    void build_order() {
        std::vector<char> placed(n_, 0);
        std::vector<std::size_t> links(n_, 0);
        order_.clear();
        while (order_.size() < n_) {
            NodeId pick = kNone;
            for (NodeId v = 0; v < n_; ++v) {
                if (placed[v])
                    continue;
                if (pick == kNone || links[v] > links[pick] ||
                    (links[v] == links[pick] && a_.degree(v) > a_.degree(pick)))
                    pick = v;
            }
            placed[pick] = 1;
            order_.push_back(pick);
            for (auto w : a_.neighbors(pick))
                ++links[w];
        }
    }

    bool extend(std::size_t depth) {
        if (depth == n_)
            return true;
        const NodeId u = order_[depth];
        for (NodeId w = 0; w < n_; ++w) {
            if (used_[w] || b_.label(w) != a_.label(u) || b_.degree(w) != a_.degree(u))
                continue;
            bool ok = true;
            for (std::size_t i = 0; i < depth && ok; ++i) {
                const NodeId x = order_[i];
                ok = a_.has_edge(u, x) == b_.has_edge(w, map_[x]);
            }
            if (!ok)
                continue;
            map_[u] = w;
            used_[w] = 1;
            if (extend(depth + 1))
                return true;
            used_[w] = 0;
            map_[u] = kNone;
        }
        return false;
    }
};

} // namespace

bool is_isomorphic(const LabeledGraph &a, const LabeledGraph &b) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count())
        return false;
    auto profile = [](const LabeledGraph &g) {
        std::vector<std::pair<Label, std::size_t>> p;
        for (NodeId v = 0; v < g.node_count(); ++v)
            p.emplace_back(g.label(v), g.degree(v));
        std::sort(p.begin(), p.end());
        return p;
    };
    if (profile(a) != profile(b))
        return false;
    return IsoMatcher(a, b).run();
}

} // namespace gcf
