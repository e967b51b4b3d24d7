#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "gcf/errors.hpp"
#include "gcf/graph.hpp"
#include "oracles.hpp"

using namespace gcf;

TEST_CASE("graph construction normalizes and validates") {
    LabeledGraph g({0, 1, 0}, {{1, 0}, {2, 1}});
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.edges()[0] == Edge{0, 1});
    CHECK(g.has_edge(1, 0));
    CHECK_FALSE(g.has_edge(0, 2));
    CHECK(g.degree(1) == 2);

    CHECK_THROWS_AS(LabeledGraph({0, 0}, {{0, 0}}), InvalidGraph);
    CHECK_THROWS_AS(LabeledGraph({0, 0}, {{0, 1}, {1, 0}}), InvalidGraph);
    CHECK_THROWS_AS(LabeledGraph({0, 0}, {{0, 2}}), InvalidGraph);
    CHECK_THROWS_AS(LabeledGraph({}, {}), InvalidGraph);
}

TEST_CASE("vocabulary interning") {
    LabelVocabulary v;
    CHECK(v.intern("C") == 0);
    CHECK(v.intern("O") == 1);
    CHECK(v.intern("C") == 0);
    CHECK(v.find("O") == 1);
    CHECK_THROWS(v.find("N"));
    CHECK(v.labels() == std::vector<Label>{0, 1});
}

TEST_CASE("connectivity") {
    CHECK(is_connected(oracle::cycle(3)));
    CHECK_FALSE(is_connected(LabeledGraph({0, 0}, {})));
    CHECK(is_connected(LabeledGraph({0}, {})));
    // path 0-1-2-3 without the middle edge
    CHECK_FALSE(is_connected(LabeledGraph({0, 0, 0, 0}, {{0, 1}, {2, 3}})));

    Rng rng(7);
    for (int t = 0; t < 300; ++t) {
        const auto n = 1 + uniform_index(rng, 50);
        std::set<Edge> e;
        const auto m = uniform_index(rng, 2 * n);
        for (std::size_t i = 0; i < m; ++i) {
            auto u = static_cast<NodeId>(uniform_index(rng, n)), v = static_cast<NodeId>(uniform_index(rng, n));
            if (u != v)
                e.insert(make_edge(u, v));
        }
        LabeledGraph g(std::vector<Label>(n, 0), std::vector<Edge>(e.begin(), e.end()));
        CHECK(is_connected(g) == oracle::connected(g));
    }
}

TEST_CASE("canonical key is permutation invariant") {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
        auto g = oracle::random_connected(rng, 2 + uniform_index(rng, 14), 3, uniform_index(rng, 10));
        std::vector<NodeId> p(g.node_count());
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), rng);
        auto h = permute(g, p);
        CHECK(canonical_key(g) == canonical_key(h));
        CHECK(is_isomorphic(g, h));
    }
}

TEST_CASE("canonical key separates label placement") {
    // A-B-C vs A-C-B
    LabeledGraph abc({0, 1, 2}, {{0, 1}, {1, 2}});
    LabeledGraph acb({0, 2, 1}, {{0, 1}, {1, 2}});
    CHECK(canonical_key(abc).form != canonical_key(acb).form);
    CHECK_FALSE(is_isomorphic(abc, acb));
}

TEST_CASE("six connected shapes on four nodes") {
    auto graphs = oracle::all_graphs(4, 1, true);
    std::set<GraphKey> keys;
    std::vector<LabeledGraph> reps;
    for (const auto &g : graphs) {
        keys.insert(canonical_key(g));
        if (std::none_of(reps.begin(), reps.end(), [&](const auto &r) { return oracle::isomorphic(r, g); }))
            reps.push_back(g);
    }
    CHECK(reps.size() == 6);
    CHECK(keys.size() == reps.size());
}

TEST_CASE("key equality matches isomorphism on all small labeled graphs") {
    // Connected graphs with up to 5 nodes and 2 labels: group by brute-force
    // isomorphism classes and compare with key classes.
    for (std::size_t n = 1; n <= 5; ++n) {
        auto graphs = oracle::all_graphs(n, 2, true);
        std::vector<GraphKey> keys;
        for (const auto &g : graphs)
            keys.push_back(canonical_key(g));
        std::vector<std::size_t> cls(graphs.size());
        std::vector<std::size_t> reps;
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            auto it = std::find_if(reps.begin(), reps.end(),
                                   [&](std::size_t r) { return oracle::isomorphic(graphs[r], graphs[i]); });
            if (it == reps.end()) {
                cls[i] = reps.size();
                reps.push_back(i);
            } else {
                cls[i] = static_cast<std::size_t>(it - reps.begin());
            }
        }
        std::size_t mismatches = 0;
        for (std::size_t i = 0; i < graphs.size(); ++i)
            for (std::size_t j = i + 1; j < graphs.size(); j += 1 + graphs.size() / 400)
                mismatches += (keys[i] == keys[j]) != (cls[i] == cls[j]);
        for (std::size_t i = 0; i < graphs.size(); ++i)
            mismatches += keys[i] != keys[reps[cls[i]]];
        std::set<GraphKey> distinct(keys.begin(), keys.end());
        CHECK(distinct.size() == reps.size());
        CHECK(mismatches == 0);
    }
}

TEST_CASE("isomorphism on 4-cycle labelings matches brute force") {
    auto c4 = [](std::vector<Label> l) { return LabeledGraph(l, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}); };
    std::vector<LabeledGraph> all;
    for (int code = 0; code < 16; ++code)
        all.push_back(c4({Label(code & 1), Label(code >> 1 & 1), Label(code >> 2 & 1), Label(code >> 3 & 1)}));
    for (const auto &a : all)
        for (const auto &b : all)
            CHECK(is_isomorphic(a, b) == oracle::isomorphic(a, b));
    CHECK_FALSE(is_isomorphic(oracle::path(4), oracle::cycle(4)));
}

TEST_CASE("regular graphs with twins keep distinct keys") {
    // K3,3 and the prism are both 3-regular on 6 nodes.
    LabeledGraph k33(std::vector<Label>(6, 0), {{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}});
    LabeledGraph prism(std::vector<Label>(6, 0), {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {0, 3}, {1, 4}, {2, 5}});
    CHECK(canonical_key(k33) != canonical_key(prism));
    CHECK(has_triangle(prism));
    CHECK_FALSE(has_triangle(k33));
}

TEST_CASE("key hex is stable text") {
    auto k = canonical_key(oracle::cycle(5));
    CHECK(k.hex().size() == 16);
    CHECK(k.hex() == canonical_key(oracle::cycle(5)).hex());
}
