#include <doctest.h>

#include <algorithm>
#include <set>

#include "gcf/editmap.hpp"
#include "gcf/errors.hpp"
#include "oracles.hpp"

using namespace gcf;

namespace {

// Every single edit of `g` by brute force, kept when the result is connected.
std::vector<EditOp> brute_ops(const LabeledGraph &g, const std::vector<Label> &vocab) {
    std::vector<EditOp> out;
    const auto n = static_cast<NodeId>(g.node_count());
    auto keep = [&](const EditOp &op) {
        try {
            if (oracle::connected(apply(g, op)))
                out.push_back(op);
        } catch (const InvalidEdit &) {
        }
    };
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            keep(g.has_edge(u, v) ? EditOp::remove_edge(u, v) : EditOp::add_edge(u, v));
    for (NodeId u = 0; u < n; ++u) {
        for (Label l : vocab) {
            keep(EditOp::add_node(u, l));
            if (l != g.label(u))
                keep(EditOp::relabel(u, l));
        }
        if (n > 1)
            keep(EditOp::remove_node(u));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<EditOp> sorted_ops(const std::vector<Neighbor> &nbs) {
    std::vector<EditOp> ops;
    for (const auto &n : nbs)
        ops.push_back(n.op);
    std::sort(ops.begin(), ops.end());
    return ops;
}

} // namespace

TEST_CASE("single node over two labels has three neighbours") {
    LabeledGraph a({0}, {});
    auto nbs = neighbors(a, std::vector<Label>{0, 1}, {});
    CHECK(nbs.size() == 3);
    CHECK(sorted_ops(nbs) == brute_ops(a, {0, 1}));
}

TEST_CASE("unlabeled triangle has nine neighbours") {
    auto tri = oracle::cycle(3);
    auto nbs = neighbors(tri, std::vector<Label>{0}, {});
    CHECK(nbs.size() == 9);
    for (const auto &n : nbs)
        CHECK(is_connected(n.graph));
}

TEST_CASE("reject-all constraint empties the neighbourhood") {
    NeighborhoodConfig cfg;
    cfg.constraint = [](const LabeledGraph &, const EditOp &) { return false; };
    CHECK(neighbors(oracle::cycle(4), std::vector<Label>{0, 1}, cfg).empty());
}

TEST_CASE("neighbourhood equals brute force on random graphs") {
    Rng rng(17);
    std::vector<Label> vocab{0, 1, 2};
    for (int t = 0; t < 100; ++t) {
        auto g = oracle::random_connected(rng, 1 + uniform_index(rng, 7), 3, uniform_index(rng, 4));
        auto nbs = neighbors(g, vocab, {});
        CHECK(sorted_ops(nbs) == brute_ops(g, vocab));
        std::set<GraphKey> keys;
        for (const auto &n : nbs) {
            CHECK(is_connected(n.graph));
            CHECK(n.graph == apply(g, n.op));
            keys.insert(canonical_key(n.graph));
        }
        CHECK(keys.size() <= nbs.size());
    }
}

TEST_CASE("apply bookkeeping and inverses") {
    auto g = oracle::cycle(5);
    auto h = apply(apply(g, EditOp::remove_edge(0, 1)), EditOp::add_edge(0, 1));
    CHECK(is_isomorphic(g, h));
    auto grown = apply(g, EditOp::add_node(2, 1));
    CHECK(grown.node_count() == 6);
    CHECK(grown.edge_count() == 6);
    CHECK(grown.label(5) == 1);
    CHECK(grown.has_edge(2, 5));

    // removing the centre of a star is a legal edit that disconnects
    LabeledGraph star({0, 0, 0, 0}, {{0, 1}, {0, 2}, {0, 3}});
    auto leaves = apply(star, EditOp::remove_node(0));
    CHECK(leaves.node_count() == 3);
    CHECK_FALSE(is_connected(leaves));
    auto nbs = neighbors(star, std::vector<Label>{0}, {});
    CHECK(std::none_of(nbs.begin(), nbs.end(), [](const Neighbor &n) {
        return n.op.kind == EditKind::remove_node && n.op.u == 0;
    }));

    CHECK_THROWS_AS(apply(g, EditOp::add_edge(0, 1)), InvalidEdit);
    CHECK_THROWS_AS(apply(g, EditOp::remove_edge(0, 2)), InvalidEdit);
    CHECK_THROWS_AS(apply(g, EditOp::relabel(9, 1)), InvalidEdit);
    CHECK_THROWS_AS(apply(g, EditOp::relabel(0, 0)), InvalidEdit);
    CHECK_THROWS_AS(apply(LabeledGraph({0}, {}), EditOp::remove_node(0)), InvalidEdit);
}

TEST_CASE("removing a node shifts higher ids down") {
    LabeledGraph g({0, 1, 2, 3}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    auto h = apply(g, EditOp::remove_node(1));
    CHECK(h.node_count() == 3);
    CHECK(h.label(1) == 2);
    CHECK(h.has_edge(1, 2));
    CHECK(h.has_edge(0, 2));
}

TEST_CASE("sampling") {
    Rng rng(23);
    std::vector<Label> vocab{0, 1};
    for (int t = 0; t < 20; ++t) {
        auto g = oracle::random_connected(rng, 3 + uniform_index(rng, 6), 2, 2);
        auto full = neighbors(g, vocab, {});
        NeighborhoodConfig cfg;
        cfg.sample_cap = full.size();
        cfg.seed = 5;
        CHECK(sorted_ops(neighbors(g, vocab, cfg)) == sorted_ops(full));

        cfg.sample_cap = full.size() / 2 + 1;
        auto a = neighbors(g, vocab, cfg);
        auto b = neighbors(g, vocab, cfg);
        CHECK(a.size() == *cfg.sample_cap);
        CHECK(sorted_ops(a) == sorted_ops(b));
        auto ops = sorted_ops(a);
        CHECK(std::adjacent_find(ops.begin(), ops.end()) == ops.end());
        auto all = sorted_ops(full);
        CHECK(std::includes(all.begin(), all.end(), ops.begin(), ops.end()));
    }
}

TEST_CASE("sampling is uniform over the neighbourhood") {
    auto g = oracle::path(4);
    std::vector<Label> vocab{0, 1};
    auto full = sorted_ops(neighbors(g, vocab, {}));
    NeighborhoodConfig cfg;
    cfg.sample_cap = 3;
    Rng rng(99);
    std::vector<int> hits(full.size());
    const int draws = 20000;
    for (int t = 0; t < draws; ++t)
        for (const auto &n : neighbors(g, vocab, cfg, &rng))
            ++hits[std::lower_bound(full.begin(), full.end(), n.op) - full.begin()];
    // each op is included with probability cap / size
    const double p = 3.0 / static_cast<double>(full.size());
    const double sd = std::sqrt(draws * p * (1 - p));
    for (int h : hits)
        CHECK(std::abs(h - draws * p) < 4 * sd);
}

TEST_CASE("max-degree constraint") {
    auto c = parse_constraint("max-degree:2");
    auto nbs = neighbors(oracle::cycle(4), std::vector<Label>{0}, NeighborhoodConfig{std::nullopt, c, 0});
    for (const auto &n : nbs)
        for (NodeId v = 0; v < n.graph.node_count(); ++v)
            CHECK(n.graph.degree(v) <= 2);
    CHECK_THROWS(parse_constraint("max-degree:x"));
    CHECK_THROWS(parse_constraint("valence"));
}
