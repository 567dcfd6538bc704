#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "disgen/backbone.hpp"
#include "disgen/batch.hpp"
#include "disgen/explainer.hpp"

namespace disgen {

struct AugmentOptions {
    double k1_fraction = 0.2;
    double k2_fraction = 0.2;
};

/// round(fraction · n), rounding halves away from zero.
std::size_t fraction_of(std::size_t n, double fraction);

/// Removes the k1 edges with the highest M̂ score (ties: ascending (u, v)).
/// When k1 ≥ E every edge goes and a warning is appended to `warnings`.
GraphRecord size_invariant_view(const GraphRecord& graph, const Tensor& symmetric, std::size_t k1,
                                std::vector<std::string>* warnings = nullptr);

/// Predicted class of a graph under some frozen model.
using LabelOracle = std::function<std::size_t(const GraphRecord&)>;

/// Removes the k2 lowest-score nodes (ties: ascending index). If the oracle's
/// label changes, k2 ← max(1, ⌊0.9·k2⌋) and the removal is retried from the
/// original graph. An attempt at k2 = 1 that still changes the label ends the
/// loop with audit.passed = false; the returned view always has fewer nodes.
/// Throws AugmentationError when the graph has a single node.
std::pair<GraphRecord, AugmentationAudit> task_invariant_view(const GraphRecord& graph, const NodeImportance& scores,
                                                              std::size_t k2, const LabelOracle& oracle);

std::pair<GraphRecord, AugmentationAudit> task_invariant_view(const GraphRecord& graph, const NodeImportance& scores,
                                                              std::size_t k2, const PretrainedModel& model);

/// Explains the graph, then builds both views with k1 = k2 = round(fraction·N).
ViewTriple make_triple(const GraphRecord& graph, const EdgeImportance& importance, const PretrainedModel& model,
                       const AugmentOptions& options = {});

std::vector<ViewTriple> augment_graphs(std::span<const GraphRecord> graphs, const EdgeExplainer& explainer,
                                       const PretrainedModel& model, const AugmentOptions& options = {});

/// `graph_id,k1,k2_final,retries,passed` with a header row.
void write_audit_csv(const std::filesystem::path& path, std::span<const ViewTriple> triples);

/// Upper bound on attempts of the k2 loop: ⌈log_0.9(1/k2)⌉ + 1.
std::size_t max_k2_attempts(std::size_t k2_initial);

}  // namespace disgen
