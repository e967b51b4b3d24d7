#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "gcf/classifier.hpp"
#include "gcf/distance.hpp"
#include "gcf/recourse.hpp"
#include "gcf/vrrw.hpp"

namespace gcf {

struct ExplainConfig {
    WalkConfig walk;
    std::size_t k = 10;
    /// Radii for the coverage-vs-theta table.
    std::vector<double> theta_sweep = {0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2};
    /// Steps between convergence trace points; 0 disables the trace.
    std::size_t trace_every = 1000;
    /// Search budget for the full distances behind costs; nullopt searches exhaustively.
    std::optional<std::size_t> eval_budget = kDefaultGedBudget;
    /// When false, distances beyond the largest radius are left infinite and costs are skipped.
    bool compute_costs = true;
};

/// Summary graphs scored against inputs.
struct Evaluation {
    CoverageMatrix matrix;                      // summary graph x input, full distances where computed
    std::vector<std::pair<double, double>> coverage_by_theta;
    double coverage = 0;                        // at the evaluation radius
    std::optional<CostReport> cost;
    std::vector<std::optional<std::size_t>> assignment;
    std::size_t inexact = 0;                    // distances left as upper bounds
};

/**
 * Scores `graphs` (in order) against `inputs`: exact distances up to the
 * largest radius in `thetas` and `theta`, budgeted full GED beyond it for costs.
 */
Evaluation evaluate_summary(std::span<const LabeledGraph> graphs, std::span<const LabeledGraph> inputs,
                            double theta, std::span<const double> thetas, bool compute_costs,
                            std::optional<std::size_t> budget, const EditCostModel &costs = {},
                            std::size_t workers = 1);

struct SummaryGraph {
    GraphKey key;
    LabeledGraph graph;
    std::uint64_t visits = 0;
    double marginal = 0;
    double cumulative = 0;
};

struct ExplainResult {
    std::vector<SummaryGraph> summary;
    std::size_t candidates = 0;          // size of the top-n pool handed to the greedy summary
    std::size_t padded = 0;
    Evaluation evaluation;
    std::vector<std::pair<std::size_t, double>> convergence; // (steps, coverage of a greedy k-summary)
    WalkStats stats;
};

struct ExplainHooks {
    std::size_t checkpoint_every = 0;
    std::function<void(const WalkEngine &)> on_checkpoint;
};

/**
 * Runs `engine` up to cfg.walk.iterations steps (continuing a restored walk),
 * builds the greedy summary over the top-n candidates at eval_theta and
 * evaluates it. The convergence trace covers the steps run by this call.
 */
ExplainResult explain(WalkEngine &engine, const ExplainConfig &cfg, const ExplainHooks &hooks = {});

/// Convenience: a fresh engine over `inputs`.
ExplainResult explain(const std::vector<LabeledGraph> &inputs, const LabelVocabulary &vocab, Classifier &classifier,
                      const ExplainConfig &cfg);

/// Greedy k-summary coverage at `theta` over a candidate pool.
double pool_coverage(const CandidateSet &pool, std::size_t inputs, std::size_t k, double theta);

/**
 * Two-stage baseline: greedy k-summary of the given desired-class graphs
 * (e.g. ground-truth positives of the dataset) at `theta`.
 */
RecourseSummary baseline_summary(std::span<const LabeledGraph> counterfactuals,
                                 std::span<const LabeledGraph> inputs, std::size_t k, double theta,
                                 std::size_t workers = 1);

} // namespace gcf
