#include "gcf/distance.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "gcf/errors.hpp"

namespace gcf {

void EditCostModel::validate() const {
    if (!(node_insert > 0 && node_delete > 0 && node_relabel > 0 && edge_insert > 0 && edge_delete > 0))
        throw ConfigError("edit costs must be positive");
}

namespace {

constexpr double kEps = 1e-9;
constexpr std::int32_t kDeleted = -1;

/// Result of one bounded search.
struct SearchResult {
    double value = std::numeric_limits<double>::infinity();
    bool exact = false;
};

/**
 * A* over assignments of the nodes of `a` (in a fixed order) to nodes of `b`
 * or to deletion. Nodes of `b` left unassigned at the end are inserted.
 *
 * The heuristic combines a label multiset bound on the unassigned nodes with
 * an edge bound: edges between an assigned node and unassigned ones can only
 * match edges between its image and unused nodes, and edges among unassigned
 * nodes can only match edges among unused nodes.
 *
 * Search nodes form a tree (parent index + image), so a partial assignment is
 * rebuilt on expansion instead of being copied into every child.
 */
class GedSearch {
public:
    GedSearch(const LabeledGraph &a, const LabeledGraph &b, const EditCostModel &costs)
        : a_(a), b_(b), c_(costs), n1_(a.node_count()), n2_(b.node_count()) {
        c_.validate();
        relabel_ = std::min(c_.node_relabel, c_.node_delete + c_.node_insert);
        Label max_label = 0;
        for (auto l : a.labels())
            max_label = std::max(max_label, l);
        for (auto l : b.labels())
            max_label = std::max(max_label, l);
        label_slots_ = static_cast<std::size_t>(max_label) + 1;

        adj1_.assign(n1_ * n1_, 0);
        for (auto [u, v] : a.edges())
            adj1_[u * n1_ + v] = adj1_[v * n1_ + u] = 1;
        adj2_.assign(n2_ * n2_, 0);
        for (auto [u, v] : b.edges())
            adj2_[u * n2_ + v] = adj2_[v * n2_ + u] = 1;

        build_order();
        // suffix_labels_[d]: label counts of order_[d..]; suffix_edges_[d]: edges inside order_[d..];
        // later_[i][d]: neighbours of order_[i] at positions >= d.
        suffix_labels_.assign((n1_ + 1) * label_slots_, 0);
        suffix_edges_.assign(n1_ + 1, 0);
        later_.assign(n1_ * (n1_ + 1), 0);
        for (std::size_t d = n1_; d-- > 0;) {
            const auto u = order_[d];
            for (std::size_t l = 0; l < label_slots_; ++l)
                suffix_labels_[d * label_slots_ + l] = suffix_labels_[(d + 1) * label_slots_ + l];
            ++suffix_labels_[d * label_slots_ + a.label(u)];
            std::size_t after = 0;
            for (auto w : a.neighbors(u))
                if (pos1_[w] > d)
                    ++after;
            suffix_edges_[d] = suffix_edges_[d + 1] + after;
        }
        for (std::size_t i = 0; i < n1_; ++i)
            for (auto w : a.neighbors(order_[i]))
                for (std::size_t d = 0; d <= pos1_[w]; ++d)
                    ++later_[i * (n1_ + 1) + d];
        labels2_.assign(label_slots_, 0);
        for (auto l : b.labels())
            ++labels2_[l];

        map_.resize(n1_);
        used_.resize(n2_);
        free2_.resize(label_slots_);
        out2_.resize(n1_);
        unused_deg_.resize(n2_);
        used_deg_.resize(n2_);
    }

    SearchResult run(double cap, std::optional<std::size_t> budget) {
        const double limit = cap;
        best_ = std::numeric_limits<double>::infinity();
        limit_ = limit;
        if (!(cap < std::numeric_limits<double>::infinity()))
            best_ = greedy_dive();

        struct Entry {
            double f;
            std::uint32_t depth;
            std::uint32_t index;
            bool operator<(const Entry &o) const {
                if (f != o.f)
                    return f > o.f;
                return depth < o.depth;
            }
        };
        std::priority_queue<Entry> open;
        nodes_.clear();
        const double root_f = root_heuristic();
        if (pruned(root_f))
            return {best_, true};
        if (n1_ == 0)
            return {root_f, true};
        nodes_.push_back({kNone, 0, 0, 0.0, root_f});
        open.push({root_f, 0, 0});

        std::size_t expanded = 0;
        while (!open.empty()) {
            auto top = open.top();
            open.pop();
            if (pruned(top.f))
                break; // open is ordered by f: nothing left can improve
            if (budget && expanded >= *budget)
                return {best_, false};
            ++expanded;
            expand(top.index, [&](const Node &child) {
                nodes_.push_back(child);
                open.push({child.f, child.depth, static_cast<std::uint32_t>(nodes_.size() - 1)});
            });
        }
        // Search space exhausted: `best_` (if finite) is optimal.
        return {best_, true};
    }

private:
    static constexpr std::uint32_t kNone = ~std::uint32_t{0};

    struct Node {
        std::uint32_t parent;
        std::int32_t image; // node of b, or kDeleted
        std::uint32_t depth;
        double g;
        double f;
    };

    const LabeledGraph &a_;
    const LabeledGraph &b_;
    EditCostModel c_;
    double relabel_ = 1;
    std::size_t n1_, n2_;
    std::size_t label_slots_ = 1;
    std::vector<char> adj1_, adj2_;
    std::vector<NodeId> order_;
    std::vector<std::size_t> pos1_;
    std::vector<std::size_t> suffix_labels_;
    std::vector<std::size_t> suffix_edges_;
    std::vector<std::size_t> later_;
    std::vector<std::size_t> labels2_;
    std::vector<Node> nodes_;
    double best_ = 0;
    double limit_ = 0;

    // Per-expansion scratch.
    std::vector<std::int32_t> map_;
    std::vector<char> used_;
    std::vector<std::size_t> free2_;
    std::vector<std::size_t> out2_;
    std::vector<std::size_t> unused_deg_;
    std::vector<std::size_t> used_deg_;

    bool pruned(double f) const { return f >= best_ - kEps || f > limit_ + kEps; }
    bool e1(std::size_t u, std::size_t v) const { return adj1_[u * n1_ + v]; }
    bool e2(std::size_t u, std::size_t v) const { return adj2_[u * n2_ + v]; }
    std::size_t later(std::size_t i, std::size_t d) const { return later_[i * (n1_ + 1) + d]; }

    double edge_diff(std::size_t have1, std::size_t have2) const {
        return have1 > have2 ? static_cast<double>(have1 - have2) * c_.edge_delete
                             : static_cast<double>(have2 - have1) * c_.edge_insert;
    }

    double label_bound(std::size_t r1, std::size_t r2, std::size_t common) const {
        const std::size_t pairs = std::min(r1, r2);
        return static_cast<double>(pairs - std::min(common, pairs)) * relabel_ +
               static_cast<double>(r1 - pairs) * c_.node_delete + static_cast<double>(r2 - pairs) * c_.node_insert;
    }

    // Highest degree first, then nodes with most links into the placed set.
    void build_order() {
        pos1_.assign(n1_, 0);
        std::vector<char> placed(n1_, 0);
        std::vector<std::size_t> links(n1_, 0);
        for (std::size_t k = 0; k < n1_; ++k) {
            std::size_t pick = n1_;
            for (std::size_t v = 0; v < n1_; ++v) {
                if (placed[v])
                    continue;
                if (pick == n1_ || links[v] > links[pick] ||
                    (links[v] == links[pick] && a_.degree(static_cast<NodeId>(v)) >
                                                    a_.degree(static_cast<NodeId>(pick))))
                    pick = v;
            }
            placed[pick] = 1;
            pos1_[pick] = k;
            order_.push_back(static_cast<NodeId>(pick));
            for (auto w : a_.neighbors(static_cast<NodeId>(pick)))
                ++links[w];
        }
    }

    double root_heuristic() const {
        std::size_t common = 0;
        for (std::size_t l = 0; l < label_slots_; ++l)
            common += std::min(suffix_labels_[l], labels2_[l]);
        return label_bound(n1_, n2_, common) + edge_diff(a_.edge_count(), b_.edge_count());
    }

    // Restores the partial assignment of `index` into the scratch buffers.
    std::size_t load(std::uint32_t index) {
        const std::size_t d = nodes_[index].depth;
        for (auto i = index; nodes_[i].depth > 0; i = nodes_[i].parent)
            map_[nodes_[i].depth - 1] = nodes_[i].image;
        std::fill(used_.begin(), used_.end(), 0);
        for (std::size_t i = 0; i < d; ++i)
            if (map_[i] != kDeleted)
                used_[static_cast<std::size_t>(map_[i])] = 1;
        return d;
    }

    template <typename Emit> void expand(std::uint32_t index, Emit &&emit) {
        const std::size_t d = load(index);
        const double g0 = nodes_[index].g;
        const NodeId u = order_[d];
        const std::size_t nd = d + 1;

        std::fill(free2_.begin(), free2_.end(), 0);
        std::size_t free_count = 0;
        for (std::size_t y = 0; y < n2_; ++y) {
            unused_deg_[y] = used_deg_[y] = 0;
            if (!used_[y]) {
                ++free2_[b_.label(static_cast<NodeId>(y))];
                ++free_count;
            }
        }
        std::size_t uu2 = 0, both_used = 0;
        for (auto [p, q] : b_.edges()) {
            (used_[q] ? used_deg_[p] : unused_deg_[p])++;
            (used_[p] ? used_deg_[q] : unused_deg_[q])++;
            uu2 += !used_[p] && !used_[q];
            both_used += used_[p] && used_[q];
        }
        for (std::size_t i = 0; i < d; ++i)
            out2_[i] = map_[i] == kDeleted ? 0 : unused_deg_[static_cast<std::size_t>(map_[i])];

        // Label bound pieces shared by all children: a-side labels from nd on.
        const std::size_t *sa = &suffix_labels_[nd * label_slots_];
        std::size_t common_base = 0;
        for (std::size_t l = 0; l < label_slots_; ++l)
            common_base += std::min(sa[l], free2_[l]);
        const std::size_t r1 = n1_ - nd;
        const std::size_t uu1 = suffix_edges_[nd];
        const bool last = nd == n1_;

        // Edge-bound terms of assigned nodes that do not involve the child's image.
        auto assigned_terms = [&](std::int32_t t) {
            double h = 0;
            for (std::size_t i = 0; i < d; ++i) {
                const std::size_t o1 = later(i, nd);
                if (map_[i] == kDeleted) {
                    h += static_cast<double>(o1) * c_.edge_delete;
                    continue;
                }
                std::size_t o2 = out2_[i];
                if (t != kDeleted && e2(static_cast<std::size_t>(map_[i]), static_cast<std::size_t>(t)))
                    --o2;
                h += edge_diff(o1, o2);
            }
            return h;
        };

        for (std::size_t t = 0; t <= n2_; ++t) {
            const bool deleting = t == n2_;
            if (!deleting && used_[t])
                continue;
            double g = g0;
            if (deleting) {
                g += c_.node_delete;
                for (std::size_t i = 0; i < d; ++i)
                    if (e1(u, order_[i]))
                        g += c_.edge_delete;
            } else {
                if (a_.label(u) != b_.label(static_cast<NodeId>(t)))
                    g += c_.node_relabel;
                for (std::size_t i = 0; i < d; ++i) {
                    const bool has1 = e1(u, order_[i]);
                    if (map_[i] == kDeleted) {
                        if (has1)
                            g += c_.edge_delete;
                        continue;
                    }
                    const bool has2 = e2(t, static_cast<std::size_t>(map_[i]));
                    if (has1 && !has2)
                        g += c_.edge_delete;
                    else if (!has1 && has2)
                        g += c_.edge_insert;
                }
            }
            if (pruned(g))
                continue;
            const std::int32_t image = deleting ? kDeleted : static_cast<std::int32_t>(t);

            if (last) {
                // Insert every unused node of b and every edge touching one.
                const std::size_t left = free_count - (deleting ? 0 : 1);
                const std::size_t used_edges = both_used + (deleting ? 0 : used_deg_[t]);
                const double f = g + static_cast<double>(left) * c_.node_insert +
                                 static_cast<double>(b_.edge_count() - used_edges) * c_.edge_insert;
                if (!pruned(f))
                    best_ = f;
                continue;
            }

            std::size_t common = common_base, r2 = free_count;
            if (!deleting) {
                const auto lt = b_.label(static_cast<NodeId>(t));
                if (free2_[lt] <= sa[lt])
                    --common;
                --r2;
            }
            double h = label_bound(r1, r2, common);
            h += assigned_terms(image);
            // The child's own node.
            const std::size_t own1 = later(d, nd);
            if (deleting) {
                h += static_cast<double>(own1) * c_.edge_delete;
                h += edge_diff(uu1, uu2);
            } else {
                h += edge_diff(own1, unused_deg_[t]);
                h += edge_diff(uu1, uu2 - unused_deg_[t]);
            }
            const double f = g + h;
            if (pruned(f))
                continue;
            emit(Node{index, image, static_cast<std::uint32_t>(nd), g, f});
        }
    }

    // Follows the best child at every level for an initial upper bound.
    double greedy_dive() {
        if (n1_ == 0)
            return root_heuristic();
        const double saved_best = best_, saved_limit = limit_;
        nodes_.clear();
        nodes_.push_back({kNone, 0, 0, 0.0, root_heuristic()});
        std::uint32_t at = 0;
        double result = std::numeric_limits<double>::infinity();
        for (;;) {
            best_ = std::numeric_limits<double>::infinity();
            limit_ = std::numeric_limits<double>::infinity();
            std::optional<Node> pick;
            expand(at, [&](const Node &child) {
                if (!pick || child.f < pick->f - kEps)
                    pick = child;
            });
            if (nodes_[at].depth + 1 == n1_) {
                result = best_;
                break;
            }
            nodes_.push_back(*pick);
            at = static_cast<std::uint32_t>(nodes_.size() - 1);
        }
        best_ = saved_best;
        limit_ = saved_limit;
        return result;
    }
};

} // namespace

GraphProfile::GraphProfile(const LabeledGraph &g) : nodes(g.node_count()), edges(g.edge_count()) {
    for (NodeId v = 0; v < g.node_count(); ++v) {
        const auto l = g.label(v);
        if (l >= label_counts.size())
            label_counts.resize(l + 1, 0);
        ++label_counts[l];
        degrees.push_back(static_cast<std::uint32_t>(g.degree(v)));
    }
    std::sort(degrees.begin(), degrees.end(), std::greater<>());
}

double ged_lower_bound(const GraphProfile &a, const GraphProfile &b, const EditCostModel &costs) {
    const double relabel = std::min(costs.node_relabel, costs.node_delete + costs.node_insert);
    std::size_t common = 0;
    for (std::size_t l = 0; l < std::min(a.label_counts.size(), b.label_counts.size()); ++l)
        common += std::min(a.label_counts[l], b.label_counts[l]);
    const std::size_t n1 = a.nodes, n2 = b.nodes, pairs = std::min(n1, n2);
    const double nodes = static_cast<double>(pairs - std::min(common, pairs)) * relabel +
                         static_cast<double>(n1 - pairs) * costs.node_delete +
                         static_cast<double>(n2 - pairs) * costs.node_insert;

    // Edges: each edge edit changes two degrees by one, and the sorted degree
    // sequences (padded with zeros) give the cheapest degree matching.
    const std::size_t m1 = a.edges, m2 = b.edges;
    const double count_bound = m1 > m2 ? static_cast<double>(m1 - m2) * costs.edge_delete
                                       : static_cast<double>(m2 - m1) * costs.edge_insert;
    std::size_t mismatch = 0;
    for (std::size_t i = 0; i < std::max(n1, n2); ++i) {
        const std::size_t x = i < n1 ? a.degrees[i] : 0, y = i < n2 ? b.degrees[i] : 0;
        mismatch += x > y ? x - y : y - x;
    }
    const double degree_bound =
        static_cast<double>((mismatch + 1) / 2) * std::min(costs.edge_delete, costs.edge_insert);
    return nodes + std::max(count_bound, degree_bound);
}

double ged_lower_bound(const LabeledGraph &a, const LabeledGraph &b, const EditCostModel &costs) {
    return ged_lower_bound(GraphProfile(a), GraphProfile(b), costs);
}

Distance ged(const LabeledGraph &a, const LabeledGraph &b, const EditCostModel &costs,
             std::optional<std::size_t> budget) {
    GedSearch search(a, b, costs);
    auto r = search.run(std::numeric_limits<double>::infinity(), budget);
    return {r.value, r.exact};
}

namespace {

std::optional<double> bounded_search(const LabeledGraph &a, const LabeledGraph &b, double max_cost,
                                     const EditCostModel &costs) {
    GedSearch search(a, b, costs);
    auto r = search.run(max_cost, std::nullopt);
    if (r.value <= max_cost + kEps)
        return r.value;
    return std::nullopt;
}

} // namespace

std::optional<double> ged_within(const LabeledGraph &a, const LabeledGraph &b, double max_cost,
                                 const EditCostModel &costs) {
    if (max_cost < 0)
        return std::nullopt;
    if (ged_lower_bound(a, b, costs) > max_cost + kEps)
        return std::nullopt;
    return bounded_search(a, b, max_cost, costs);
}

Distance normalized_ged(const LabeledGraph &a, const LabeledGraph &b, const EditCostModel &costs,
                        std::optional<std::size_t> budget) {
    auto d = ged(a, b, costs, budget);
    return {d.value / size_normalizer(a, b), d.exact};
}

Distance normalized_within(const LabeledGraph &a, const LabeledGraph &b, double theta,
                           const EditCostModel &costs) {
    const double size = size_normalizer(a, b);
    if (auto v = ged_within(a, b, theta * size, costs))
        return {*v / size, true};
    return Distance::infinite();
}

Distance normalized_within(const LabeledGraph &a, const LabeledGraph &b, double theta, const GraphProfile &pa,
                           const GraphProfile &pb, const EditCostModel &costs) {
    const double size = size_normalizer(a, b);
    const double cap = theta * size;
    if (cap < 0 || ged_lower_bound(pa, pb, costs) > cap + kEps)
        return Distance::infinite();
    if (auto v = bounded_search(a, b, cap, costs))
        return {*v / size, true};
    return Distance::infinite();
}

} // namespace gcf
