#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gcf/classifier.hpp"
#include "gcf/graph.hpp"

namespace gcf {

/// A graph-classification corpus. `labels[i]` is the 0/1 class of `graphs[i]`.
struct Dataset {
    std::string name;
    std::vector<LabeledGraph> graphs;
    std::vector<int> labels;
    /// Symbols are the node-label ids of the source files; frequencies count the ingested corpus.
    LabelVocabulary vocab;
    std::size_t dropped_self_loops = 0;

    std::size_t size() const noexcept { return graphs.size(); }
};

/**
 * Reads the standard multi-graph text layout from `dir`: NAME_A.txt (1-indexed
 * node pairs), NAME_graph_indicator.txt, NAME_graph_labels.txt and
 * NAME_node_labels.txt. Tokens may be separated by commas and/or blanks.
 *
 * Graph labels are mapped to {0,1}: files already using 0/1 are kept, any
 * other two values map smaller -> 0, larger -> 1. Throws ParseError with the
 * offending file and line.
 */
Dataset parse_dataset(const std::filesystem::path &dir);

/**
 * Writes `ds` in the same layout as NAME_*.txt files inside `dir` (created if
 * needed). Node labels are written as their symbols when every symbol is an
 * integer, otherwise as label indices.
 */
void emit_dataset(const Dataset &ds, const std::filesystem::path &dir);

/// Counts node labels over `graphs` and returns a vocabulary with those frequencies.
std::vector<std::size_t> count_labels(const std::vector<LabeledGraph> &graphs, std::size_t vocab_size);

/**
 * Drops every graph holding a node whose label occurs fewer than `min_freq`
 * times in the ingested corpus (the vocabulary's frequencies). Surviving
 * labels are re-numbered densely; their ingestion frequencies are kept, which
 * makes the filter idempotent.
 */
Dataset filter_rare_labels(const Dataset &ds, std::size_t min_freq = 50);

struct InputSelection {
    std::vector<std::size_t> inputs;  // connected graphs with an undesired verdict
    std::vector<std::size_t> others;  // connected graphs with a desired verdict
    std::size_t disconnected = 0;     // excluded from both
};

/// Partitions the connected graphs of `ds` by verdict. Transport errors propagate.
InputSelection select_inputs(const Dataset &ds, Classifier &classifier);

struct Split {
    std::vector<std::size_t> train, validation, test;
};

/// Seeded class-stratified split; per class floor(n*train) / floor(n*validation) / remainder.
Split stratified_split(const std::vector<int> &labels, std::uint64_t seed, double train = 0.8,
                       double validation = 0.1);

} // namespace gcf
