#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gcf/graph.hpp"
#include "gcf/rng.hpp"

namespace gcf {

enum class EditKind : std::uint8_t { add_edge, remove_edge, add_node, remove_node, relabel_node };

/**
 * A single edit of the edit map.
 *
 *   add_edge / remove_edge : endpoints (u, v)
 *   add_node               : new node with `label`, attached to u by one edge
 *   remove_node            : node u and its incident edges
 *   relabel_node           : node u gets `label`
 */
struct EditOp {
    EditKind kind = EditKind::add_edge;
    NodeId u = 0;
    NodeId v = 0;
    Label label = 0;

    static EditOp add_edge(NodeId u, NodeId v) { return {EditKind::add_edge, u, v, 0}; }
    static EditOp remove_edge(NodeId u, NodeId v) { return {EditKind::remove_edge, u, v, 0}; }
    static EditOp add_node(NodeId attach, Label l) { return {EditKind::add_node, attach, 0, l}; }
    static EditOp remove_node(NodeId u) { return {EditKind::remove_node, u, 0, 0}; }
    static EditOp relabel(NodeId u, Label l) { return {EditKind::relabel_node, u, 0, l}; }

    friend bool operator==(const EditOp &, const EditOp &) = default;
    friend auto operator<=>(const EditOp &, const EditOp &) = default;

    std::string describe() const;
};

/// Domain rule deciding whether an edit may be taken from a graph.
using EditConstraint = std::function<bool(const LabeledGraph &, const EditOp &)>;

/// Rejects edits that leave any node with degree above `max_degree`.
EditConstraint max_degree_constraint(std::size_t max_degree);

/// Parses a named built-in constraint ("max-degree:<k>").
EditConstraint parse_constraint(const std::string &spec);

struct NeighborhoodConfig {
    /// Maximum neighbours returned; larger neighbourhoods are sampled uniformly without replacement.
    std::optional<std::size_t> sample_cap;
    EditConstraint constraint;
    std::uint64_t seed = 0;
};

struct Neighbor {
    EditOp op;
    LabeledGraph graph;
};

/// Applies `op`. Throws InvalidEdit for payloads naming missing nodes/edges or duplicating an edge.
/// Node ids above a removed node shift down by one.
LabeledGraph apply(const LabeledGraph &g, const EditOp &op);

/// Valid edit ops from `g` (connected result, constraint satisfied), in enumeration order.
std::vector<EditOp> neighbor_ops(const LabeledGraph &g, std::span<const Label> vocabulary,
                                 const EditConstraint &constraint = {});

/**
 * All graphs one edit away from connected `g`, restricted to connected results
 * that pass the constraint. With a sample cap below the neighbourhood size a
 * uniform sample (in enumeration order) is drawn from `rng`, or from a fresh
 * engine seeded with `cfg.seed` when `rng` is null.
 */
std::vector<Neighbor> neighbors(const LabeledGraph &g, std::span<const Label> vocabulary,
                                const NeighborhoodConfig &cfg, Rng *rng = nullptr);

} // namespace gcf
