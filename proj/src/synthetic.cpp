#include "gcf/synthetic.hpp"

#include <algorithm>

#include "gcf/editmap.hpp"
#include "gcf/errors.hpp"
#include "gcf/rng.hpp"

namespace gcf {

namespace {

std::size_t draw_between(Rng &rng, std::size_t lo, std::size_t hi) { return lo + uniform_index(rng, hi - lo + 1); }

bool shares_neighbor(const LabeledGraph &g, NodeId u, NodeId v) {
    auto a = g.neighbors(u), b = g.neighbors(v);
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j])
            return true;
        a[i] < b[j] ? ++i : ++j;
    }
    return false;
}

LabeledGraph make_template(Rng &rng, const SyntheticOptions &o) {
    const auto n = draw_between(rng, o.min_template_nodes, o.max_template_nodes);
    std::vector<Label> labels(n);
    for (auto &l : labels)
        l = static_cast<Label>(uniform_index(rng, 3));
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v)
        edges.push_back(make_edge(static_cast<NodeId>(uniform_index(rng, v)), v));
    LabeledGraph g(labels, edges);
    // One or two chords that keep the template triangle-free.
    const auto chords = draw_between(rng, 1, 2);
    for (std::size_t c = 0; c < chords; ++c) {
        std::vector<Edge> options;
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v)
                if (!g.has_edge(u, v) && !shares_neighbor(g, u, v))
                    options.emplace_back(u, v);
        if (options.empty())
            break;
        edges.push_back(options[uniform_index(rng, options.size())]);
        g = LabeledGraph(labels, edges);
    }
    return g;
}

} // namespace

Dataset synthetic_motif_dataset(const SyntheticOptions &o) {
    if (o.templates == 0 || o.graphs == 0)
        throw ConfigError("synthetic corpus needs at least one template and one graph");
    if (o.min_template_nodes < 2 || o.min_template_nodes > o.max_template_nodes || o.max_template_nodes > o.max_nodes)
        throw ConfigError("synthetic template sizes must satisfy 2 <= min <= max <= max_nodes");

    Rng rng(o.seed);
    Dataset ds;
    ds.name = "SYNTH";
    for (auto s : {"A", "B", "C"})
        ds.vocab.intern(s);
    const auto labels = ds.vocab.labels();

    std::vector<LabeledGraph> templates;
    for (std::size_t t = 0; t < o.templates; ++t)
        templates.push_back(make_template(rng, o));

    const std::size_t max_nodes = o.max_nodes;
    EditConstraint keep_shape = [max_nodes](const LabeledGraph &g, const EditOp &op) {
        auto h = apply(g, op);
        return h.node_count() <= max_nodes && !has_triangle(h);
    };

    for (std::size_t i = 0; i < o.graphs; ++i) {
        auto g = templates[i % o.templates];
        const int cls = static_cast<int>((i / o.templates) % 2);
        const auto edits = draw_between(rng, 1, std::max<std::size_t>(o.max_edits, 1));
        for (std::size_t e = 0; e < edits; ++e) {
            auto ops = neighbor_ops(g, labels, keep_shape);
            if (ops.empty())
                break;
            g = apply(g, ops[uniform_index(rng, ops.size())]);
        }
        if (cls == 1) {
            std::vector<Edge> options;
            for (NodeId u = 0; u < g.node_count(); ++u)
                for (NodeId v = u + 1; v < g.node_count(); ++v)
                    if (!g.has_edge(u, v) && shares_neighbor(g, u, v))
                        options.emplace_back(u, v);
            if (!options.empty()) {
                const auto [u, v] = options[uniform_index(rng, options.size())];
                g = apply(g, EditOp::add_edge(u, v));
            }
        }
        ds.labels.push_back(has_triangle(g) ? 1 : 0);
        ds.graphs.push_back(std::move(g));
    }
    ds.vocab.set_frequencies(count_labels(ds.graphs, ds.vocab.size()));
    return ds;
}

} // namespace gcf
