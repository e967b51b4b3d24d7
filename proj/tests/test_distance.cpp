#include <doctest.h>

#include "gcf/distance.hpp"
#include "gcf/editmap.hpp"
#include "oracles.hpp"

using namespace gcf;

namespace {

// Formaldehyde H2C=O and formic acid HCOOH with explicit hydrogens.
// Labels: 0 = C, 1 = O, 2 = H.
LabeledGraph formaldehyde() { return LabeledGraph({0, 1, 2, 2}, {{0, 1}, {0, 2}, {0, 3}}); }
LabeledGraph formic_acid() { return LabeledGraph({0, 1, 1, 2, 2}, {{0, 1}, {0, 2}, {0, 3}, {2, 4}}); }

} // namespace

TEST_CASE("ged basics") {
    auto tri = oracle::cycle(3);
    auto p3 = oracle::path(3);
    auto d = ged(tri, tri);
    CHECK(d.value == 0);
    CHECK(d.exact);
    CHECK(ged(tri, p3).value == 1);

    auto n = normalized_ged(tri, p3);
    CHECK(n.value == doctest::Approx(1.0 / 11));
    CHECK(n.exact);
    CHECK(normalized_ged(p3, p3).value == 0);
}

TEST_CASE("caption edit path for formaldehyde to formic acid") {
    const auto a = formaldehyde(), b = formic_acid();
    // With relabeling at unit cost a hydrogen can turn into the hydroxyl
    // oxygen, which beats the four-edit path described for the figure.
    CHECK(ged(a, b).value == oracle::ged(a, b));
    CHECK(ged(a, b).value == 3);
    // Pricing relabels as delete + insert leaves only add/remove edits;
    // then the cheapest path is exactly one edge removal, one node and two edges.
    EditCostModel no_relabel;
    no_relabel.node_relabel = 2;
    CHECK(ged(a, b, no_relabel).value == 4);
    CHECK(normalized_ged(a, b, no_relabel).value == doctest::Approx(4.0 / (4 + 5 + 3 + 4)));
}

TEST_CASE("ged matches exhaustive search on random small pairs") {
    Rng rng(3);
    for (int t = 0; t < 300; ++t) {
        auto a = oracle::random_connected(rng, 1 + uniform_index(rng, 6), 3, uniform_index(rng, 5));
        auto b = oracle::random_connected(rng, 1 + uniform_index(rng, 6), 3, uniform_index(rng, 5));
        const double want = oracle::ged(a, b);
        auto got = ged(a, b, {}, std::nullopt);
        CHECK(got.exact);
        CHECK(got.value == want);
        CHECK(ged(b, a, {}, std::nullopt).value == want);
        CHECK(ged_lower_bound(a, b) <= want);
        CHECK(ged_lower_bound(GraphProfile(a), GraphProfile(b)) <= want);
        auto capped = ged_within(a, b, want);
        REQUIRE(capped);
        CHECK(*capped == want);
        if (want >= 1)
            CHECK_FALSE(ged_within(a, b, want - 1));
    }
}

TEST_CASE("triangle inequality and zero iff isomorphic") {
    Rng rng(5);
    std::vector<LabeledGraph> gs;
    for (int i = 0; i < 24; ++i)
        gs.push_back(oracle::random_connected(rng, 2 + uniform_index(rng, 4), 2, uniform_index(rng, 4)));
    std::vector<std::vector<double>> d(gs.size(), std::vector<double>(gs.size()));
    for (std::size_t i = 0; i < gs.size(); ++i)
        for (std::size_t j = 0; j < gs.size(); ++j) {
            d[i][j] = ged(gs[i], gs[j], {}, std::nullopt).value;
            CHECK((d[i][j] == 0) == oracle::isomorphic(gs[i], gs[j]));
        }
    for (std::size_t i = 0; i < gs.size(); ++i)
        for (std::size_t j = 0; j < gs.size(); ++j)
            for (std::size_t k = 0; k < gs.size(); ++k)
                CHECK(d[i][k] <= d[i][j] + d[j][k]);
}

TEST_CASE("budgeted search never undercuts the exact value") {
    Rng rng(9);
    for (int t = 0; t < 40; ++t) {
        auto a = oracle::random_connected(rng, 7 + uniform_index(rng, 3), 2, 4);
        auto b = oracle::random_connected(rng, 7 + uniform_index(rng, 3), 2, 4);
        const auto exact = ged(a, b, {}, std::nullopt);
        REQUIRE(exact.exact);
        for (std::size_t budget : {1u, 5u, 50u}) {
            auto bounded = ged(a, b, {}, budget);
            CHECK(bounded.value >= exact.value);
            if (bounded.exact)
                CHECK(bounded.value == exact.value);
        }
    }
}

TEST_CASE("normalized_within agrees with the full distance") {
    Rng rng(13);
    for (int t = 0; t < 200; ++t) {
        auto a = oracle::random_connected(rng, 3 + uniform_index(rng, 6), 2, uniform_index(rng, 4));
        auto b = oracle::random_connected(rng, 3 + uniform_index(rng, 6), 2, uniform_index(rng, 4));
        const auto full = normalized_ged(a, b, {}, std::nullopt).value;
        for (double theta : {0.0, 0.05, 0.1, 0.2}) {
            auto w = normalized_within(a, b, theta);
            if (full <= theta + 1e-12) {
                CHECK(w.exact);
                CHECK(w.value == doctest::Approx(full));
            } else {
                CHECK_FALSE(w.finite());
            }
            auto p = normalized_within(a, b, theta, GraphProfile(a), GraphProfile(b));
            CHECK(p.finite() == w.finite());
        }
    }
}

TEST_CASE("costs must be positive") {
    EditCostModel c;
    c.edge_insert = 0;
    CHECK_THROWS(c.validate());
    CHECK_THROWS(NormalizedGed(c));
}

TEST_CASE("distance of each edit kind from its origin") {
    Rng rng(21);
    std::vector<Label> vocab{0, 1};
    for (int t = 0; t < 30; ++t) {
        auto g = oracle::random_connected(rng, 2 + uniform_index(rng, 5), 2, uniform_index(rng, 3));
        for (const auto &nb : neighbors(g, vocab, {})) {
            const double d = ged(g, nb.graph, {}, std::nullopt).value;
            CHECK(d == oracle::ged(g, nb.graph));
            switch (nb.op.kind) {
            case EditKind::add_node:
                CHECK(d == 2); // the node and its attaching edge
                break;
            case EditKind::remove_node:
                CHECK(d == 1 + static_cast<double>(g.degree(nb.op.u)));
                break;
            default:
                CHECK(d == 1);
            }
        }
    }
}
