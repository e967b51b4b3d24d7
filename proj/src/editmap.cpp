#include "gcf/editmap.hpp"

#include <algorithm>
#include <numeric>

#include "gcf/errors.hpp"

namespace gcf {

std::string EditOp::describe() const {
    switch (kind) {
    case EditKind::add_edge:
        return "add-edge(" + std::to_string(u) + "," + std::to_string(v) + ")";
    case EditKind::remove_edge:
        return "remove-edge(" + std::to_string(u) + "," + std::to_string(v) + ")";
    case EditKind::add_node:
        return "add-node(label=" + std::to_string(label) + ",attach=" + std::to_string(u) + ")";
    case EditKind::remove_node:
        return "remove-node(" + std::to_string(u) + ")";
    case EditKind::relabel_node:
        return "relabel(" + std::to_string(u) + "->" + std::to_string(label) + ")";
    }
    return "?";
}

EditConstraint max_degree_constraint(std::size_t max_degree) {
    return [max_degree](const LabeledGraph &g, const EditOp &op) {
        switch (op.kind) {
        case EditKind::add_edge:
            return g.degree(op.u) + 1 <= max_degree && g.degree(op.v) + 1 <= max_degree;
        case EditKind::add_node:
            return g.degree(op.u) + 1 <= max_degree;
        default:
            return true;
        }
    };
}

EditConstraint parse_constraint(const std::string &spec) {
    const std::string prefix = "max-degree:";
    if (spec.rfind(prefix, 0) == 0) {
        const auto rest = spec.substr(prefix.size());
        std::size_t used = 0;
        unsigned long k = 0;
        try {
            k = std::stoul(rest, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != rest.size() || k == 0)
            throw ConfigError("bad max-degree constraint '" + spec + "'");
        return max_degree_constraint(k);
    }
    throw ConfigError("unknown constraint '" + spec + "'");
}

LabeledGraph apply(const LabeledGraph &g, const EditOp &op) {
    const auto n = g.node_count();
    auto require_node = [&](NodeId x) {
        if (x >= n)
            throw InvalidEdit(op.describe() + ": node " + std::to_string(x) + " does not exist");
    };
    std::vector<Label> labels(g.labels().begin(), g.labels().end());
    std::vector<Edge> edges(g.edges().begin(), g.edges().end());

    switch (op.kind) {
    case EditKind::add_edge: {
        require_node(op.u);
        require_node(op.v);
        if (op.u == op.v)
            throw InvalidEdit(op.describe() + ": self-loop");
        if (g.has_edge(op.u, op.v))
            throw InvalidEdit(op.describe() + ": edge already present");
        edges.push_back(make_edge(op.u, op.v));
        break;
    }
    case EditKind::remove_edge: {
        require_node(op.u);
        require_node(op.v);
        auto it = std::find(edges.begin(), edges.end(), make_edge(op.u, op.v));
        if (it == edges.end())
            throw InvalidEdit(op.describe() + ": edge not present");
        edges.erase(it);
        break;
    }
    case EditKind::add_node: {
        require_node(op.u);
        labels.push_back(op.label);
        edges.push_back(make_edge(op.u, static_cast<NodeId>(n)));
        break;
    }
    case EditKind::remove_node: {
        require_node(op.u);
        if (n == 1)
            throw InvalidEdit(op.describe() + ": cannot remove the only node");
        labels.erase(labels.begin() + op.u);
        std::vector<Edge> kept;
        kept.reserve(edges.size());
        for (auto [a, b] : edges) {
            if (a == op.u || b == op.u)
                continue;
            kept.emplace_back(a > op.u ? a - 1 : a, b > op.u ? b - 1 : b);
        }
        edges.swap(kept);
        break;
    }
    case EditKind::relabel_node: {
        require_node(op.u);
        if (labels[op.u] == op.label)
            throw InvalidEdit(op.describe() + ": label unchanged");
        labels[op.u] = op.label;
        break;
    }
    }
    return LabeledGraph(std::move(labels), std::move(edges));
}

namespace {

/// Bridges and articulation points of a connected graph (Tarjan lowlink).
struct CutStructure {
    std::vector<char> articulation;
    std::vector<char> bridge; // indexed like g.edges()
};

CutStructure cut_structure(const LabeledGraph &g) {
    const auto n = g.node_count();
    CutStructure cs;
    cs.articulation.assign(n, 0);
    cs.bridge.assign(g.edge_count(), 0);
    std::vector<std::size_t> disc(n, 0), low(n, 0);
    std::vector<NodeId> parent(n, ~NodeId{0});
    std::size_t timer = 0;

    struct Frame {
        NodeId v;
        std::size_t next;
        std::size_t children;
    };
    for (NodeId root = 0; root < n; ++root) {
        if (disc[root])
            continue;
        std::vector<Frame> stack{{root, 0, 0}};
        disc[root] = low[root] = ++timer;
        while (!stack.empty()) {
            auto &f = stack.back();
            auto nb = g.neighbors(f.v);
            if (f.next < nb.size()) {
                const NodeId w = nb[f.next++];
                if (!disc[w]) {
                    parent[w] = f.v;
                    ++f.children;
                    disc[w] = low[w] = ++timer;
                    stack.push_back({w, 0, 0});
                } else if (w != parent[f.v]) {
                    low[f.v] = std::min(low[f.v], disc[w]);
                }
                continue;
            }
            const Frame done = f;
            stack.pop_back();
            if (stack.empty()) {
                if (done.children > 1)
                    cs.articulation[done.v] = 1;
                continue;
            }
            const NodeId p = stack.back().v;
            low[p] = std::min(low[p], low[done.v]);
            if (low[done.v] > disc[p]) {
                auto e = make_edge(p, done.v);
                auto it = std::lower_bound(g.edges().begin(), g.edges().end(), e);
                cs.bridge[static_cast<std::size_t>(it - g.edges().begin())] = 1;
            }
            if (parent[p] != ~NodeId{0} && low[done.v] >= disc[p])
                cs.articulation[p] = 1;
        }
    }
    return cs;
}

} // namespace

std::vector<EditOp> neighbor_ops(const LabeledGraph &g, std::span<const Label> vocabulary,
                                 const EditConstraint &constraint) {
    const auto n = static_cast<NodeId>(g.node_count());
    const auto cuts = cut_structure(g);
    std::vector<EditOp> ops;
    auto offer = [&](EditOp op) {
        if (!constraint || constraint(g, op))
            ops.push_back(op);
    };

    const auto edges = g.edges();
    for (std::size_t i = 0; i < edges.size(); ++i)
        if (!cuts.bridge[i])
            offer(EditOp::remove_edge(edges[i].first, edges[i].second));
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (!g.has_edge(u, v))
                offer(EditOp::add_edge(u, v));
    for (NodeId u = 0; u < n; ++u)
        for (auto l : vocabulary)
            offer(EditOp::add_node(u, l));
    if (n > 1)
        for (NodeId u = 0; u < n; ++u)
            if (!cuts.articulation[u])
                offer(EditOp::remove_node(u));
    for (NodeId u = 0; u < n; ++u)
        for (auto l : vocabulary)
            if (l != g.label(u))
                offer(EditOp::relabel(u, l));
    return ops;
}

std::vector<Neighbor> neighbors(const LabeledGraph &g, std::span<const Label> vocabulary,
                                const NeighborhoodConfig &cfg, Rng *rng) {
    if (cfg.sample_cap && *cfg.sample_cap == 0)
        throw ConfigError("sample cap must be at least 1");
    auto ops = neighbor_ops(g, vocabulary, cfg.constraint);
    if (cfg.sample_cap && ops.size() > *cfg.sample_cap) {
        Rng local(cfg.seed);
        Rng &r = rng ? *rng : local;
        std::vector<std::size_t> idx(ops.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        const std::size_t cap = *cfg.sample_cap;
        for (std::size_t i = 0; i < cap; ++i)
            std::swap(idx[i], idx[i + uniform_index(r, idx.size() - i)]);
        idx.resize(cap);
        std::sort(idx.begin(), idx.end());
        std::vector<EditOp> picked;
        picked.reserve(cap);
        for (auto i : idx)
            picked.push_back(ops[i]);
        ops.swap(picked);
    }
    std::vector<Neighbor> out;
    out.reserve(ops.size());
    for (const auto &op : ops)
        out.push_back({op, apply(g, op)});
    return out;
}

} // namespace gcf
