#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcf/distance.hpp"
#include "gcf/graph.hpp"

namespace gcf {

/// d <= theta with a small absolute tolerance for normalized-GED round-off.
inline bool within_radius(double d, double theta) { return d <= theta + 1e-12; }

/// Candidate-by-input normalized distances.
struct CoverageMatrix {
    std::size_t inputs = 0;
    std::vector<std::vector<Distance>> rows;

    std::size_t candidates() const noexcept { return rows.size(); }
    bool covers(std::size_t row, std::size_t input, double theta) const {
        return within_radius(rows[row][input].value, theta);
    }
    /// Per input, the minimum distance over `chosen` (+inf when `chosen` is empty).
    std::vector<double> min_distances(std::span<const std::size_t> chosen) const;
};

enum class CostAggregation { mean, median, p25, p75 };

std::string to_string(CostAggregation agg);
CostAggregation parse_aggregation(const std::string &s);

/// Linear interpolation between closest ranks; `q` in [0,1]. `values` need not be sorted.
double percentile(std::vector<double> values, double q);

/// Fraction of inputs whose nearest chosen candidate lies within theta.
double cover(const CoverageMatrix &m, std::span<const std::size_t> chosen, double theta);

/// Aggregate of per-input min distances. Throws when `chosen` is empty.
double cost(const CoverageMatrix &m, std::span<const std::size_t> chosen, CostAggregation agg);

/// cover(chosen + {candidate}) - cover(chosen).
double gain(const CoverageMatrix &m, std::size_t candidate, std::span<const std::size_t> chosen, double theta);

struct CostReport {
    double mean = 0;
    double median = 0;
    double p25 = 0;
    double p75 = 0;
};

CostReport cost_report(const CoverageMatrix &m, std::span<const std::size_t> chosen);

/**
 * r(G): for each input the index into `chosen` of its nearest candidate,
 * ties broken by smaller key. Empty optional when nothing is chosen.
 */
std::vector<std::optional<std::size_t>> nearest_assignment(const CoverageMatrix &m,
                                                           std::span<const std::size_t> chosen,
                                                           std::span<const GraphKey> keys);

/// Tie-break information per matrix row.
struct CandidateRank {
    std::uint64_t visits = 0;
    const GraphKey *key = nullptr;
};

struct RecourseSummary {
    std::vector<std::size_t> chosen;    // matrix rows in insertion order
    std::vector<double> marginal;       // coverage gain of each insertion
    std::vector<double> cumulative;     // coverage after each insertion
    std::size_t padded = 0;             // trailing zero-gain insertions
    double coverage = 0;
    std::optional<CostReport> cost;     // absent when nothing was chosen
    std::vector<std::optional<std::size_t>> assignment;
};

/**
 * Greedy maximum coverage: k times append the candidate with the largest
 * coverage gain (ties: more visits, then smaller key). Once no candidate adds
 * coverage, remaining slots are filled by the most visited unused candidates.
 */
RecourseSummary greedy_summary(const CoverageMatrix &m, std::span<const CandidateRank> ranks, std::size_t k,
                               double theta);

} // namespace gcf
