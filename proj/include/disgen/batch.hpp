#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <span>
#include <vector>

#include "disgen/graph.hpp"
#include "disgen/tape.hpp"

namespace disgen {

/// Record of how a triple's views were produced.
struct AugmentationAudit {
    std::size_t k1 = 0;
    std::size_t k2_initial = 0;
    std::size_t k2_final = 0;
    std::size_t retries = 0;
    std::size_t attempts = 0;
    bool passed = false;
    /// Whether the pretrained model's prediction differs on the size-invariant view.
    bool size_view_label_changed = false;
    std::vector<std::string> warnings;

    bool operator==(const AugmentationAudit&) const = default;
};

/// Original graph with its size-invariant view (edges removed, same node
/// count) and task-invariant view (nodes removed, prediction kept).
struct ViewTriple {
    GraphRecord original;
    GraphRecord size_invariant;
    GraphRecord task_invariant;
    AugmentationAudit audit;

    bool operator==(const ViewTriple&) const = default;
};

/// Several graphs laid out block-diagonally: node rows of graph k occupy
/// [offsets[k], offsets[k+1]) of `features`.
///
/// When built from triples the graph order is
/// [g₁, g₁⁽¹⁾, g₁⁽²⁾, …, g_b, g_b⁽¹⁾, g_b⁽²⁾].
struct GraphBatch {
    std::vector<GraphRecord> graphs;
    std::vector<std::size_t> view_index;  // 0 = original, 1 = size-invariant, 2 = task-invariant
    std::vector<std::size_t> offsets;
    std::vector<std::size_t> node_graph;
    Tensor features;

    std::size_t graph_count() const noexcept { return graphs.size(); }
    std::size_t node_count() const noexcept { return node_graph.size(); }

    /// Normalized adjacency blocks (GCN propagation).
    std::shared_ptr<const BlockDiagonal> normalized_blocks() const;
    /// Raw 0/1 adjacency blocks (GIN neighbour sums).
    std::shared_ptr<const BlockDiagonal> adjacency_blocks() const;
};

/// Stacks arbitrary graphs (all views reported as 0).
GraphBatch assemble_graphs(std::vector<GraphRecord> graphs);

/// Stacks b ≥ 1 triples in contract order. Throws ContractError when empty.
GraphBatch assemble_batch(std::span<const ViewTriple> triples);
GraphBatch assemble_batch(std::span<const ViewTriple* const> triples);

}  // namespace disgen
