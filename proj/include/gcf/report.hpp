#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcf/explain.hpp"

namespace gcf {

/// Run description recorded in report headers. Holds nothing machine-specific.
struct RunInfo {
    std::string dataset;
    std::string classifier;
    int desired_class = 1;
    std::size_t dataset_graphs = 0;
    std::size_t disconnected = 0;
    std::vector<std::size_t> input_indices; // dataset positions of the inputs
    ExplainConfig config;
};

/// Coverage, per-theta coverage, costs and assignment of an evaluation (the part evaluate recomputes).
nlohmann::ordered_json metrics_json(const Evaluation &ev, double theta);

nlohmann::ordered_json graph_to_json(const LabeledGraph &g, const LabelVocabulary &vocab);
/// Reads {"nodes": [...], "edges": [[u, v], ...]}; unknown symbols are added to `vocab`.
LabeledGraph graph_from_json(const nlohmann::json &j, LabelVocabulary &vocab);

/// summary.json contents ("v":1).
std::string summary_json(const RunInfo &info, const ExplainResult &res, const LabelVocabulary &vocab);

/**
 * Writes summary.json, coverage_vs_k.tsv, cost_table.tsv, coverage_vs_theta.tsv
 * and convergence.tsv into `dir`. Returns the written paths.
 */
std::vector<std::filesystem::path> write_reports(const std::filesystem::path &dir, const RunInfo &info,
                                                 const ExplainResult &res, const LabelVocabulary &vocab);

/// A parsed summary.json.
struct SummaryDocument {
    std::string dataset;
    std::string variant;
    double eval_theta = 0.1;
    std::vector<double> thetas;
    std::vector<LabeledGraph> graphs;
    std::optional<std::vector<std::size_t>> input_indices;
    nlohmann::json metrics;
};

/// Parses summary.json text; graph labels are interned into `vocab`. Throws ParseError.
SummaryDocument parse_summary(const std::string &text, LabelVocabulary &vocab, const std::string &origin = "summary");

std::string read_text(const std::filesystem::path &path);
void write_text(const std::filesystem::path &path, const std::string &text);

} // namespace gcf
