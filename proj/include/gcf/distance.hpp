#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gcf/graph.hpp"

namespace gcf {

/// Unit costs of the five elementary edits. All must be positive.
struct EditCostModel {
    double node_insert = 1.0;
    double node_delete = 1.0;
    double node_relabel = 1.0;
    double edge_insert = 1.0;
    double edge_delete = 1.0;

    void validate() const;
};

/**
 * A graph distance. `exact` is true when `value` is provably minimal; false
 * when the search budget ran out and `value` is the cost of the best complete
 * edit path found (an upper bound).
 */
struct Distance {
    double value = 0.0;
    bool exact = true;

    static Distance infinite() { return {std::numeric_limits<double>::infinity(), false}; }
    bool finite() const noexcept { return value < std::numeric_limits<double>::infinity(); }
};

/// Default number of search nodes expanded before falling back to a bound.
inline constexpr std::size_t kDefaultGedBudget = 200000;

/**
 * Graph edit distance by A* over partial node assignments.
 *
 * Without a budget the search always completes. With one, it stops after
 * `budget` expansions and returns the best complete edit path seen so far
 * (never below the exact value).
 */
Distance ged(const LabeledGraph &a, const LabeledGraph &b, const EditCostModel &costs = {},
             std::optional<std::size_t> budget = kDefaultGedBudget);

/// Exact GED if it is at most `max_cost`, otherwise nullopt. Prunes everything above the cap.
std::optional<double> ged_within(const LabeledGraph &a, const LabeledGraph &b, double max_cost,
                                 const EditCostModel &costs = {});

/// Node, edge, label and degree summary of a graph, reusable across many lower-bound checks.
struct GraphProfile {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::vector<std::uint32_t> label_counts; // indexed by label
    std::vector<std::uint32_t> degrees;      // sorted descending

    explicit GraphProfile(const LabeledGraph &g);
};

/// Cheap admissible lower bound on GED (label multiset + edge count and degree sequences).
double ged_lower_bound(const LabeledGraph &a, const LabeledGraph &b, const EditCostModel &costs = {});
double ged_lower_bound(const GraphProfile &a, const GraphProfile &b, const EditCostModel &costs = {});

/// |V1| + |V2| + |E1| + |E2|.
inline double size_normalizer(const LabeledGraph &a, const LabeledGraph &b) {
    return static_cast<double>(a.node_count() + b.node_count() + a.edge_count() + b.edge_count());
}

/// GED divided by the combined node and edge count of both graphs.
Distance normalized_ged(const LabeledGraph &a, const LabeledGraph &b, const EditCostModel &costs = {},
                        std::optional<std::size_t> budget = kDefaultGedBudget);

/**
 * Normalized distance when it is at most `theta`; otherwise an infinite,
 * non-exact Distance. Used for coverage decisions, where only distances at
 * or below the radius matter.
 */
Distance normalized_within(const LabeledGraph &a, const LabeledGraph &b, double theta,
                           const EditCostModel &costs = {});
/// As above, with precomputed profiles of `a` and `b` for the lower-bound prefilter.
Distance normalized_within(const LabeledGraph &a, const LabeledGraph &b, double theta, const GraphProfile &pa,
                           const GraphProfile &pb, const EditCostModel &costs = {});

/// Interface for alternative graph distances.
class GraphDistance {
public:
    virtual ~GraphDistance() = default;
    virtual Distance distance(const LabeledGraph &a, const LabeledGraph &b) const = 0;
    /// Distance if it is at most `theta`, else an infinite Distance.
    virtual Distance distance_within(const LabeledGraph &a, const LabeledGraph &b, double theta) const = 0;
    /// distance_within with precomputed profiles; implementations may ignore them.
    virtual Distance distance_within_profiled(const LabeledGraph &a, const LabeledGraph &b, double theta,
                                              const GraphProfile &, const GraphProfile &) const {
        return distance_within(a, b, theta);
    }
};

class NormalizedGed final : public GraphDistance {
public:
    explicit NormalizedGed(EditCostModel costs = {}, std::optional<std::size_t> budget = kDefaultGedBudget)
        : costs_(costs), budget_(budget) {
        costs_.validate();
    }
    Distance distance(const LabeledGraph &a, const LabeledGraph &b) const override {
        return normalized_ged(a, b, costs_, budget_);
    }
    Distance distance_within(const LabeledGraph &a, const LabeledGraph &b, double theta) const override {
        return normalized_within(a, b, theta, costs_);
    }
    Distance distance_within_profiled(const LabeledGraph &a, const LabeledGraph &b, double theta,
                                      const GraphProfile &pa, const GraphProfile &pb) const override {
        return normalized_within(a, b, theta, pa, pb, costs_);
    }

private:
    EditCostModel costs_;
    std::optional<std::size_t> budget_;
};

} // namespace gcf
