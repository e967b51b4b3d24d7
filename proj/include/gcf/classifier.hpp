#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gcf/graph.hpp"

namespace gcf {

/// Verdict for one graph. `probability` is the probability of the desired class.
struct ClassifierVerdict {
    bool desired = false;
    double probability = 0.0;

    friend bool operator==(const ClassifierVerdict &, const ClassifierVerdict &) = default;
};

/**
 * A binary graph model returning P(class 1 | graph).
 *
 * Implementations must be deterministic. `concurrent()` reports whether
 * `predict` may be called from several threads at once.
 */
class GraphModel {
public:
    virtual ~GraphModel() = default;
    virtual double predict(const LabeledGraph &g) = 0;
    virtual std::vector<double> predict_batch(std::span<const LabeledGraph> graphs);
    virtual bool concurrent() const { return true; }
    /// Whether verdicts are worth caching by GraphKey (true for expensive models).
    virtual bool cacheable() const { return false; }
    virtual std::string describe() const = 0;
};

/// Hard 0/1 model: 1 iff the graph contains `pattern` as a (not necessarily induced) subgraph.
class MotifModel final : public GraphModel {
public:
    /// `match_labels` = false treats every pattern label as a wildcard.
    MotifModel(std::string name, LabeledGraph pattern, bool match_labels);

    static std::unique_ptr<MotifModel> contains_triangle();
    /// Built-in motif by name: "contains-triangle", "contains-square", "contains-star3".
    static std::unique_ptr<MotifModel> named(const std::string &name);

    double predict(const LabeledGraph &g) override;
    std::string describe() const override { return "motif:" + name_; }

private:
    std::string name_;
    LabeledGraph pattern_;
    bool match_labels_;
};

/// True iff `pattern` maps injectively into `g` preserving edges (and labels when requested).
bool contains_subgraph(const LabeledGraph &g, const LabeledGraph &pattern, bool match_labels);

/**
 * Weisfeiler-Lehman subtree features: for each refinement round 0..rounds,
 * a count per colour. Colours are 64-bit digests of label symbols and sorted
 * neighbour colours, so features are stable across vocabularies that agree
 * on symbols.
 */
std::map<std::uint64_t, double> wl_features(const LabeledGraph &g, const LabelVocabulary &vocab, int rounds);

struct TrainingOptions {
    int rounds = 3;
    int epochs = 300;
    double learning_rate = 0.5;
    double l2 = 1e-4;
};

/// Logistic regression over WL subtree feature counts (log1p-scaled).
class WlLinearModel final : public GraphModel {
public:
    WlLinearModel(LabelVocabulary vocab, int rounds, double bias, std::map<std::uint64_t, double> weights);

    /// Deterministic full-batch gradient descent on `graphs` with 0/1 `labels`.
    static WlLinearModel train(std::span<const LabeledGraph> graphs, std::span<const int> labels,
                               const LabelVocabulary &vocab, const TrainingOptions &opts = {});

    /// Structured-text model file (JSON, "v":1).
    std::string to_text() const;
    static WlLinearModel from_text(const std::string &text);
    void save(const std::string &path) const;
    static WlLinearModel load(const std::string &path);

    double predict(const LabeledGraph &g) override;
    bool cacheable() const override { return true; }
    std::string describe() const override { return "wl-linear(rounds=" + std::to_string(rounds_) + ")"; }

    /// Vocabulary the model was trained with; graphs passed to predict must use it.
    const LabelVocabulary &vocabulary() const noexcept { return vocab_; }
    /// Rebinds graphs from another vocabulary by symbol. Unknown symbols hash as themselves.
    void set_graph_vocabulary(const LabelVocabulary &vocab) { graph_vocab_ = vocab; }

    double bias() const noexcept { return bias_; }
    const std::map<std::uint64_t, double> &weights() const noexcept { return weights_; }

private:
    LabelVocabulary vocab_;
    LabelVocabulary graph_vocab_;
    int rounds_;
    double bias_;
    std::map<std::uint64_t, double> weights_;
};

/**
 * Binds a model to the explainer: which model class is desired, the decision
 * threshold, and an optional verdict cache keyed by GraphKey.
 */
class Classifier {
public:
    /// `desired_class` selects which model class (0 or 1) counts as desired.
    explicit Classifier(std::shared_ptr<GraphModel> model, int desired_class = 1, double threshold = 0.5);

    ClassifierVerdict classify(const LabeledGraph &g);
    /// Element-wise identical to classify; order preserved. Failures discard partial results.
    std::vector<ClassifierVerdict> classify_batch(std::span<const LabeledGraph> graphs);

    ClassifierVerdict verdict_from_model_probability(double p_class1) const;

    bool concurrent() const { return model_->concurrent(); }
    bool caching() const noexcept { return cache_enabled_; }
    void set_caching(bool on) { cache_enabled_ = on; }
    std::size_t cache_size() const;

    double threshold() const noexcept { return threshold_; }
    int desired_class() const noexcept { return desired_class_; }
    GraphModel &model() noexcept { return *model_; }
    std::string describe() const;

private:
    std::shared_ptr<GraphModel> model_;
    int desired_class_;
    double threshold_;
    bool cache_enabled_;
    mutable std::mutex mutex_;
    std::unordered_map<GraphKey, ClassifierVerdict, GraphKeyHash> cache_;
};

} // namespace gcf
