#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcf/classifier.hpp"
#include "gcf/distance.hpp"
#include "gcf/editmap.hpp"
#include "gcf/graph.hpp"
#include "gcf/rng.hpp"
#include "gcf/space_saving.hpp"
#include "gcf/thread_pool.hpp"

namespace gcf {

/// Component switches for the ablation variants.
struct Ablations {
    bool no_vertex_reinforcement = false; // N(v) = 1
    bool no_importance = false;           // I(v) = 1
    bool no_dynamic_teleport = false;     // uniform teleport

    /// "full", or the '+'-joined variant names ("NVR", "NIF", "NDT").
    std::string name() const;
    /// Accepts "full"/"none" or a comma/plus separated list of NVR, NIF, NDT.
    static Ablations parse(const std::string &text);

    friend bool operator==(const Ablations &, const Ablations &) = default;
};

/// Which candidates count as S inside the importance function and g(G).
enum class CoverageScope {
    top_n, // the n most visited candidates
    all,   // every reinforced candidate still tracked by the counter
};

std::string to_string(CoverageScope scope);
CoverageScope parse_coverage_scope(const std::string &text);

struct WalkConfig {
    double walk_theta = 0.05;  // coverage radius inside the importance function and g(G)
    double eval_theta = 0.10;  // candidate rows in S are exact up to max(walk_theta, eval_theta)
    double tau = 0.1;
    double alpha = 0.5;
    std::size_t iterations = 50000;
    std::optional<std::size_t> candidate_pool;   // n; defaults to the number of inputs
    std::optional<std::size_t> counter_capacity; // space-saving capacity; nullopt counts exactly
    std::optional<std::size_t> sample_cap;       // max neighbours scored per step
    EditConstraint constraint;
    Ablations ablations;
    CoverageScope coverage_scope = CoverageScope::top_n;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t row_cache_capacity = 200000;

    double row_radius() const { return walk_theta > eval_theta ? walk_theta : eval_theta; }
    std::size_t pool_size(std::size_t inputs) const { return candidate_pool ? *candidate_pool : inputs; }
    void validate(std::size_t inputs) const;
};

using DistanceRow = std::vector<Distance>;

/// A reinforced (desired-class) graph in the candidate set S.
struct CandidateEntry {
    LabeledGraph graph;
    std::shared_ptr<const DistanceRow> row;
};

struct Candidate {
    GraphKey key;
    LabeledGraph graph;
    std::uint64_t visits = 0;
    DistanceRow row;
};

/// The n most visited candidates, visits descending then key ascending.
struct CandidateSet {
    std::vector<Candidate> items;
};

struct WalkStats {
    std::size_t steps = 0;
    std::size_t teleports = 0;
    std::size_t forced_teleports = 0;
    std::size_t uniform_fallbacks = 0;
    std::size_t scored_neighbors = 0; // summed over non-teleport steps
    std::size_t reinforced_visits = 0;
    std::size_t evictions = 0;

    /// Mean neighbourhood size over the steps that scored one.
    double mean_degree() const;
};

/**
 * Importance of a graph: p * (alpha * Cover({v}) + (1 - alpha) * gain(v; S)),
 * both at `theta`; `cover_counts[i]` is g(G_i) over the current S.
 */
double importance(double probability, std::span<const Distance> row, std::span<const std::uint32_t> cover_counts,
                  double theta, double alpha);

/// Normalized p(u, v) proportional to importance * max(N, 1); uniform when all weights vanish.
std::vector<double> transition_probabilities(std::span<const double> importances,
                                             std::span<const std::uint64_t> visits, bool no_reinforcement);

/// Softmax of -g(G) over the inputs; uniform when `uniform` is set.
std::vector<double> teleport_probabilities(std::span<const std::uint32_t> cover_counts, bool uniform);

/**
 * Splits tracked keys into the n best (visits descending, key ascending) and
 * the rest, reporting keys that cross the boundary.
 */
class TopRanked {
public:
    struct Change {
        GraphKey key;
        bool entered = false;
    };

    explicit TopRanked(std::size_t n = 0) : n_(n) {}

    /// `key` moved from `old_count` (0 when new) to `new_count`.
    std::vector<Change> update(const GraphKey &key, std::uint64_t old_count, std::uint64_t new_count);
    /// `key` with `count` stopped being tracked.
    std::vector<Change> remove(const GraphKey &key, std::uint64_t count);

    bool contains(const GraphKey &key, std::uint64_t count) const { return top_.count({count, key}) != 0; }
    std::size_t size() const noexcept { return top_.size(); }

private:
    struct Order {
        bool operator()(const std::pair<std::uint64_t, GraphKey> &a,
                        const std::pair<std::uint64_t, GraphKey> &b) const {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        }
    };
    using Ranked = std::set<std::pair<std::uint64_t, GraphKey>, Order>;

    std::size_t n_;
    Ranked top_, rest_;

    void rebalance(std::vector<Change> &out);
};

/// Everything a walk mutates. Copyable for checkpoints.
struct WalkState {
    std::optional<LabeledGraph> current;
    SpaceSavingCounter<GraphKey, GraphKeyHash> visits;
    std::unordered_map<GraphKey, CandidateEntry, GraphKeyHash> candidates;
    TopRanked ranked;                      // scope of S for importance and g(G) under top_n
    std::vector<std::uint32_t> cover_counts;
    std::size_t step = 0;
    Rng rng;
    WalkStats stats;
};

/// One scored transition target.
struct ScoredNeighbor {
    EditOp op;
    LabeledGraph graph;
    ClassifierVerdict verdict;
    std::optional<GraphKey> key;
    std::shared_ptr<const DistanceRow> row; // exact up to walk_theta at least
    bool candidate_row = false;             // row is exact up to row_radius()
    double importance = 0;
    std::uint64_t visits = 0;
};

/**
 * Vertex-reinforced random walk over the edit map.
 *
 * Starts at a random input graph, then repeatedly teleports (probability tau)
 * to an input chosen by dynamic teleportation or moves to a neighbour with
 * probability proportional to importance times visit count. Desired-class
 * graphs that are visited are reinforced and kept in the candidate set.
 */
class WalkEngine {
public:
    WalkEngine(std::vector<LabeledGraph> inputs, LabelVocabulary vocab, Classifier &classifier, WalkConfig cfg,
               std::shared_ptr<const GraphDistance> distance = nullptr);

    /// Picks the start graph. Called by run() when needed.
    void start();
    /// One iteration of the walk.
    void step();
    /// Runs until `iterations` steps have been taken; `observer` fires every `every` steps.
    void run(std::size_t iterations, const std::function<void(const WalkEngine &)> &observer = {},
             std::size_t every = 0);
    /// Runs config().iterations steps and returns the top-n candidates.
    CandidateSet run_to_completion();

    /// Scores the (possibly sampled) neighbourhood of the current graph. Consumes rng for sampling.
    std::vector<ScoredNeighbor> score_neighborhood();
    /// Picks the next graph: teleport with probability tau, else a weighted neighbour.
    ScoredNeighbor transition();
    /// Draws an input by dynamic teleportation.
    std::size_t teleport_target();

    CandidateSet candidates() const;
    /// Candidate row of `g` against the inputs, exact up to config().row_radius() (cached by key).
    std::shared_ptr<const DistanceRow> row_for(const LabeledGraph &g, const GraphKey &key);

    const WalkState &state() const noexcept { return state_; }
    const WalkConfig &config() const noexcept { return cfg_; }
    const std::vector<LabeledGraph> &inputs() const noexcept { return inputs_; }
    const LabelVocabulary &vocabulary() const noexcept { return vocab_; }

    /// Versioned structured-text snapshot of the walk (counts, S, g, rng, current graph).
    std::string checkpoint() const;
    /// Restores a snapshot produced by checkpoint() for the same inputs.
    void restore(const std::string &text);

private:
    std::vector<LabeledGraph> inputs_;
    LabelVocabulary vocab_;
    std::vector<Label> labels_;
    Classifier &classifier_;
    WalkConfig cfg_;
    std::shared_ptr<const GraphDistance> distance_;
    WorkerPool pool_;
    WalkState state_;
    // Neighbour rows only need to be exact up to walk_theta; S rows up to row_radius().
    std::unordered_map<GraphKey, std::shared_ptr<const DistanceRow>, GraphKeyHash> walk_rows_;
    std::unordered_map<GraphKey, std::shared_ptr<const DistanceRow>, GraphKeyHash> candidate_rows_;
    std::vector<ClassifierVerdict> input_verdicts_;
    std::vector<GraphProfile> input_profiles_;

    DistanceRow compute_row(const LabeledGraph &g, double radius) const;
    static void remember_row(std::unordered_map<GraphKey, std::shared_ptr<const DistanceRow>, GraphKeyHash> &cache,
                             std::size_t capacity, const GraphKey &key, std::shared_ptr<const DistanceRow> row);
    void visit(ScoredNeighbor target);
    void add_coverage(const DistanceRow &row, int sign);
    void apply_changes(const std::vector<TopRanked::Change> &changes);
    void reinforce(const GraphKey &key, const LabeledGraph &graph, std::shared_ptr<const DistanceRow> row);
};

} // namespace gcf
