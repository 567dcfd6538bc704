#include "disgen/batch.hpp"

#include <algorithm>

#include "disgen/error.hpp"

namespace disgen {

namespace {

GraphBatch stack(std::vector<GraphRecord> graphs, std::vector<std::size_t> views) {
    if (graphs.empty()) throw ContractError("assemble: no graphs");
    const std::size_t width = graphs.front().feature_width();
    GraphBatch batch;
    batch.offsets.reserve(graphs.size() + 1);
    batch.offsets.push_back(0);
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        if (graphs[k].feature_width() != width) {
            throw DimensionError("assemble: graph " + std::to_string(graphs[k].id) + " has feature width " +
                                 std::to_string(graphs[k].feature_width()) + ", expected " + std::to_string(width));
        }
        batch.offsets.push_back(batch.offsets.back() + graphs[k].num_nodes());
        batch.node_graph.insert(batch.node_graph.end(), graphs[k].num_nodes(), k);
    }
    batch.features = Tensor(batch.offsets.back(), width);
    for (std::size_t k = 0; k < graphs.size(); ++k) {
        std::copy_n(graphs[k].features.data(), graphs[k].features.size(),
                    batch.features.data() + batch.offsets[k] * width);
    }
    batch.graphs = std::move(graphs);
    batch.view_index = std::move(views);
    return batch;
}

}  // namespace

std::shared_ptr<const BlockDiagonal> GraphBatch::normalized_blocks() const {
    std::vector<Tensor> blocks;
    blocks.reserve(graphs.size());
    for (const auto& g : graphs) blocks.push_back(normalize_adjacency(g));
    return std::make_shared<const BlockDiagonal>(std::move(blocks));
}

std::shared_ptr<const BlockDiagonal> GraphBatch::adjacency_blocks() const {
    std::vector<Tensor> blocks;
    blocks.reserve(graphs.size());
    for (const auto& g : graphs) blocks.push_back(adjacency_matrix(g));
    return std::make_shared<const BlockDiagonal>(std::move(blocks));
}

GraphBatch assemble_graphs(std::vector<GraphRecord> graphs) {
    std::vector<std::size_t> views(graphs.size(), 0);
    return stack(std::move(graphs), std::move(views));
}

GraphBatch assemble_batch(std::span<const ViewTriple* const> triples) {
    if (triples.empty()) throw ContractError("assemble_batch: empty triple list");
    std::vector<GraphRecord> graphs;
    std::vector<std::size_t> views;
    graphs.reserve(3 * triples.size());
    for (const ViewTriple* t : triples) {
        graphs.push_back(t->original);
        graphs.push_back(t->size_invariant);
        graphs.push_back(t->task_invariant);
        views.insert(views.end(), {0, 1, 2});
    }
    return stack(std::move(graphs), std::move(views));
}

GraphBatch assemble_batch(std::span<const ViewTriple> triples) {
    std::vector<const ViewTriple*> ptrs;
    ptrs.reserve(triples.size());
    for (const auto& t : triples) ptrs.push_back(&t);
    return assemble_batch(std::span<const ViewTriple* const>(ptrs));
}

}  // namespace disgen
