#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "disgen/tensor.hpp"

namespace disgen {

/// Undirected edge stored with u < v.
struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;

    auto operator<=>(const Edge&) const = default;
};

/// One labelled graph: node features X (N×d_f), canonical edge list, class.
///
/// Invariants: N ≥ 1; edges sorted ascending, u < v < N, no duplicates.
struct GraphRecord {
    std::int64_t id = 0;
    Tensor features;
    std::vector<Edge> edges;
    std::size_t label = 0;

    std::size_t num_nodes() const noexcept { return features.rows(); }
    std::size_t num_edges() const noexcept { return edges.size(); }
    std::size_t feature_width() const noexcept { return features.cols(); }

    bool operator==(const GraphRecord&) const = default;
};

/// Builds a record, canonicalising edge orientation/order and dropping
/// duplicate pairs. Throws ContractError on self-loops or out-of-range nodes.
GraphRecord make_graph(std::int64_t id, Tensor features, std::vector<Edge> edges, std::size_t label);

/// Throws ContractError if any record invariant is violated.
void validate(const GraphRecord& g);

/// Per-node neighbour lists, ascending.
std::vector<std::vector<std::size_t>> neighbor_lists(const GraphRecord& g);

/// Dense 0/1 adjacency matrix (no self-loops).
Tensor adjacency_matrix(const GraphRecord& g);

/// D̃^{-1/2}(A + I)D̃^{-1/2}, with D̃ the degree matrix of A + I.
Tensor normalize_adjacency(const GraphRecord& g);

/// Drops the given edges (absent ones are ignored). Nodes untouched.
GraphRecord remove_edges(const GraphRecord& g, std::span<const Edge> removed);

/// Drops the given nodes and incident edges; survivors keep their relative order.
GraphRecord remove_nodes(const GraphRecord& g, std::span<const std::size_t> removed);

/// Relabels node i as perm[i].
GraphRecord permute_nodes(const GraphRecord& g, std::span<const std::size_t> perm);

}  // namespace disgen
