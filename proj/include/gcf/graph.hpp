#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gcf {

using NodeId = std::uint32_t;
using Label = std::uint32_t;

/// Undirected edge stored with `first < second`.
using Edge = std::pair<NodeId, NodeId>;

inline Edge make_edge(NodeId u, NodeId v) { return u < v ? Edge{u, v} : Edge{v, u}; }

/**
 * Undirected simple graph with categorical node labels.
 *
 * Node ids are dense (0..node_count()-1). Labels are indices into the
 * LabelVocabulary of the dataset the graph belongs to. Instances are
 * immutable after construction; the constructor rejects self-loops,
 * duplicate edges, dangling endpoints and the empty graph.
 */
class LabeledGraph {
public:
    LabeledGraph(std::vector<Label> labels, std::vector<Edge> edges);

    std::size_t node_count() const noexcept { return labels_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    Label label(NodeId v) const { return labels_[v]; }
    std::span<const Label> labels() const noexcept { return labels_; }

    /// Sorted edge list, each edge with first < second.
    std::span<const Edge> edges() const noexcept { return edges_; }

    /// Sorted adjacency of `v`.
    std::span<const NodeId> neighbors(NodeId v) const noexcept {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

    bool has_edge(NodeId u, NodeId v) const noexcept;

    /// Structural + label equality on identical node ids (not isomorphism).
    friend bool operator==(const LabeledGraph &a, const LabeledGraph &b) noexcept {
        return a.labels_ == b.labels_ && a.edges_ == b.edges_;
    }

private:
    std::vector<Label> labels_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> adjacency_;
};

/// Ordered set of label symbols plus their corpus frequencies.
class LabelVocabulary {
public:
    LabelVocabulary() = default;
    explicit LabelVocabulary(std::vector<std::string> symbols);

    std::size_t size() const noexcept { return symbols_.size(); }
    const std::string &symbol(Label l) const { return symbols_.at(l); }
    const std::vector<std::string> &symbols() const noexcept { return symbols_; }

    /// Returns the label for `symbol`, adding it when absent.
    Label intern(const std::string &symbol);
    /// Throws std::out_of_range when `symbol` is unknown.
    Label find(const std::string &symbol) const;
    bool contains(const std::string &symbol) const;

    std::size_t frequency(Label l) const { return frequency_.at(l); }
    void set_frequencies(std::vector<std::size_t> freq);
    const std::vector<std::size_t> &frequencies() const noexcept { return frequency_; }

    /// All labels 0..size()-1.
    std::vector<Label> labels() const;

    friend bool operator==(const LabelVocabulary &, const LabelVocabulary &) = default;

private:
    std::vector<std::string> symbols_;
    std::vector<std::size_t> frequency_;
};

/**
 * Identity of a labeled graph up to isomorphism.
 *
 * `form` is a canonical encoding (labels in canonical order followed by the
 * canonically relabeled sorted edge list); `hash` is a digest of it. Equality
 * and ordering always fall back to the full form, so hash collisions are
 * harmless.
 */
struct GraphKey {
    std::uint64_t hash = 0;
    std::vector<std::uint32_t> form;

    friend bool operator==(const GraphKey &a, const GraphKey &b) noexcept {
        return a.hash == b.hash && a.form == b.form;
    }
    /// Byte order: digest first, then the canonical form.
    friend std::strong_ordering operator<=>(const GraphKey &a, const GraphKey &b) noexcept {
        if (auto c = a.hash <=> b.hash; c != 0)
            return c;
        return a.form <=> b.form;
    }

    std::string hex() const;
};

struct GraphKeyHash {
    std::size_t operator()(const GraphKey &k) const noexcept { return static_cast<std::size_t>(k.hash); }
};

/// One connected component. The single-node graph is connected.
bool is_connected(const LabeledGraph &g);

GraphKey canonical_key(const LabeledGraph &g);

/// Canonical relabeling: result[v] is the canonical position of node v.
std::vector<NodeId> canonical_order(const LabeledGraph &g);

/// Label-preserving isomorphism test by backtracking (independent of canonical_key).
bool is_isomorphic(const LabeledGraph &a, const LabeledGraph &b);

/// Returns `g` with node v renamed to perm[v].
LabeledGraph permute(const LabeledGraph &g, std::span<const NodeId> perm);

/// True if any three mutually adjacent nodes exist.
bool has_triangle(const LabeledGraph &g);

} // namespace gcf
