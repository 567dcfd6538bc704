#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disgen/backbone.hpp"
#include "disgen/graph.hpp"

namespace disgen {

/// Edge-importance matrix M (zero off the edge set) and its symmetrization
/// M̂ = ½(M + Mᵀ).
struct EdgeImportance {
    Tensor raw;
    Tensor symmetric;
    std::int64_t graph_id = 0;
    std::uint64_t model_fingerprint = 0;
    std::vector<std::string> warnings;
};

/// m_j = Σ_{k ∈ N(j)} M̂[j, k].
struct NodeImportance {
    std::vector<double> scores;
};

/// Any explainer producing an N×N edge-importance matrix for a graph.
class EdgeExplainer {
public:
    virtual ~EdgeExplainer() = default;
    virtual EdgeImportance explain(const GraphRecord& graph) const = 0;
};

/// Single-edge occlusion against a frozen model: for each undirected edge,
/// M[u,v] = M[v,u] = p − p₋ₑ, where p is the probability of the model's
/// predicted class on the full graph and p₋ₑ the same class's probability
/// with that edge removed.
class OcclusionExplainer final : public EdgeExplainer {
public:
    explicit OcclusionExplainer(const PretrainedModel& model) : model_(&model) {}
    EdgeImportance explain(const GraphRecord& graph) const override;

private:
    const PretrainedModel* model_;
};

/// Raw occlusion matrix (M only).
Tensor occlusion_importance(const GraphRecord& graph, const PretrainedModel& model);

/// ½(M + Mᵀ). Throws DimensionError on a non-square input.
Tensor symmetrize(const Tensor& m);

NodeImportance node_scores(const Tensor& symmetric, const GraphRecord& graph);

/// Score of each canonical edge (u < v) read from M̂.
std::vector<double> edge_scores(const Tensor& symmetric, const GraphRecord& graph);

/// Rebuilds M and M̂ from per-edge scores in canonical edge order.
EdgeImportance importance_from_edge_scores(const GraphRecord& graph, std::span<const double> scores,
                                           std::uint64_t fingerprint);

/// Plain-text cache `graph_id,u,v,score` (one line per undirected edge)
/// preceded by a `# fingerprint <n>` header.
void write_importance_cache(const std::filesystem::path& path, std::uint64_t fingerprint,
                            const std::vector<EdgeImportance>& importances, const std::vector<GraphRecord>& graphs);

/// Returns per-graph M̂ keyed by graph id, or nothing when the file is missing
/// or was written for a different fingerprint.
std::optional<std::map<std::int64_t, std::vector<double>>> read_importance_cache(const std::filesystem::path& path,
                                                                                 std::uint64_t fingerprint);

}  // namespace disgen
