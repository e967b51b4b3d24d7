#pragma once

#include <cstddef>
#include <cstdint>

#include "gcf/dataset.hpp"

namespace gcf {

/**
 * Knobs for the triangle-motif benchmark corpus. Graphs are grouped around
 * `templates` random triangle-free templates; each member takes 1..max_edits
 * random triangle-free edits, and class-1 members then gain one chord that
 * closes a triangle.
 */
struct SyntheticOptions {
    std::size_t graphs = 200;
    std::size_t templates = 16;
    std::size_t min_template_nodes = 7;
    std::size_t max_template_nodes = 10;
    std::size_t max_nodes = 12;
    std::size_t max_edits = 3;
    std::uint64_t seed = 0;
};

/// Labels {A, B, C}; graph classes alternate by template block. Deterministic per seed.
Dataset synthetic_motif_dataset(const SyntheticOptions &opts = {});

} // namespace gcf
