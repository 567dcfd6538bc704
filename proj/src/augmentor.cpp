#include "disgen/augmentor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "disgen/error.hpp"

namespace disgen {

std::size_t fraction_of(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

std::size_t max_k2_attempts(std::size_t k2_initial) {
    if (k2_initial <= 1) return 1;
    return static_cast<std::size_t>(std::ceil(std::log(1.0 / static_cast<double>(k2_initial)) / std::log(0.9))) + 1;
}

GraphRecord size_invariant_view(const GraphRecord& graph, const Tensor& symmetric, std::size_t k1,
                                std::vector<std::string>* warnings) {
    const std::size_t e = graph.num_edges();
    if (k1 >= e && k1 > 0 && warnings) {
        warnings->push_back("k1=" + std::to_string(k1) + " >= edge count " + std::to_string(e) + "; all edges removed");
    }
    std::vector<std::size_t> order(e);
    std::iota(order.begin(), order.end(), 0);
    // Edges are stored in ascending (u, v) order, so a stable sort on score
    // alone already breaks ties lexicographically.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return symmetric(graph.edges[a].u, graph.edges[a].v) > symmetric(graph.edges[b].u, graph.edges[b].v);
    });
    std::vector<Edge> removed;
    for (std::size_t i = 0; i < std::min(k1, e); ++i) removed.push_back(graph.edges[order[i]]);
    return remove_edges(graph, removed);
}

std::pair<GraphRecord, AugmentationAudit> task_invariant_view(const GraphRecord& graph, const NodeImportance& scores,
                                                              std::size_t k2, const LabelOracle& oracle) {
    const std::size_t n = graph.num_nodes();
    if (n < 2) throw AugmentationError("graph " + std::to_string(graph.id) + " has a single node; none can be removed");
    if (scores.scores.size() != n) throw DimensionError("task_invariant_view: score count differs from node count");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores.scores[a] < scores.scores[b]; });

    AugmentationAudit audit;
    audit.k2_initial = std::clamp<std::size_t>(k2, 1, n - 1);
    const std::size_t target = oracle(graph);

    std::size_t current = audit.k2_initial;
    GraphRecord view;
    while (true) {
        ++audit.attempts;
        std::vector<std::size_t> removed(order.begin(), order.begin() + current);
        view = remove_nodes(graph, removed);
        if (oracle(view) == target) {
            audit.passed = true;
            break;
        }
        if (current == 1) {
            audit.warnings.push_back("graph " + std::to_string(graph.id) +
                                     ": prediction changed even with one node removed");
            break;
        }
        current = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(current))));
        ++audit.retries;
    }
    audit.k2_final = current;
    return {std::move(view), std::move(audit)};
}

std::pair<GraphRecord, AugmentationAudit> task_invariant_view(const GraphRecord& graph, const NodeImportance& scores,
                                                              std::size_t k2, const PretrainedModel& model) {
    return task_invariant_view(graph, scores, k2,
                               [&model](const GraphRecord& g) { return predict_label(model, g).label; });
}

ViewTriple make_triple(const GraphRecord& graph, const EdgeImportance& importance, const PretrainedModel& model,
                       const AugmentOptions& options) {
    const std::size_t n = graph.num_nodes();
    const std::size_t k1 = fraction_of(n, options.k1_fraction);
    const std::size_t k2 = std::max<std::size_t>(1, fraction_of(n, options.k2_fraction));

    std::vector<std::string> warnings = importance.warnings;
    GraphRecord size_view = size_invariant_view(graph, importance.symmetric, k1, &warnings);
    auto [task_view, audit] = task_invariant_view(graph, node_scores(importance.symmetric, graph), k2, model);
    audit.k1 = k1;
    audit.size_view_label_changed = predict_label(model, size_view).label != predict_label(model, graph).label;
    audit.warnings.insert(audit.warnings.begin(), warnings.begin(), warnings.end());
    return ViewTriple{graph, std::move(size_view), std::move(task_view), std::move(audit)};
}

std::vector<ViewTriple> augment_graphs(std::span<const GraphRecord> graphs, const EdgeExplainer& explainer,
                                       const PretrainedModel& model, const AugmentOptions& options) {
    std::vector<ViewTriple> out;
    out.reserve(graphs.size());
    for (const auto& g : graphs) out.push_back(make_triple(g, explainer.explain(g), model, options));
    return out;
}

void write_audit_csv(const std::filesystem::path& path, std::span<const ViewTriple> triples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "graph_id,k1,k2_final,retries,passed\n";
    for (const auto& t : triples) {
        out << t.original.id << ',' << t.audit.k1 << ',' << t.audit.k2_final << ',' << t.audit.retries << ','
            << (t.audit.passed ? 1 : 0) << '\n';
    }
}

}  // namespace disgen
