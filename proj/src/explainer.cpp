#include "disgen/explainer.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include "disgen/error.hpp"
#include "disgen/tu_format.hpp"

namespace disgen {

Tensor occlusion_importance(const GraphRecord& graph, const PretrainedModel& model) {
    const std::size_t n = graph.num_nodes();
    Tensor m(n, n);
    if (graph.edges.empty()) return m;

    std::vector<GraphRecord> probes;
    probes.reserve(graph.edges.size() + 1);
    probes.push_back(graph);
    for (const Edge& e : graph.edges) probes.push_back(remove_edges(graph, std::span<const Edge>(&e, 1)));

    const Tensor logits = model.logits(probes);
    const Tensor probs = softmax_rows(logits);
    const Prediction full = prediction_from_logits(logits.values().subspan(0, logits.cols()));
    const double p = probs(0, full.label);
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const Edge& e = graph.edges[k];
        const double drop = p - probs(k + 1, full.label);
        m(e.u, e.v) = drop;
        m(e.v, e.u) = drop;
    }
    return m;
}

EdgeImportance OcclusionExplainer::explain(const GraphRecord& graph) const {
    EdgeImportance out;
    out.graph_id = graph.id;
    out.model_fingerprint = model_->fingerprint;
    out.raw = occlusion_importance(graph, *model_);
    out.symmetric = symmetrize(out.raw);
    if (graph.edges.empty()) {
        out.warnings.push_back("graph " + std::to_string(graph.id) + " has no edges; importance is all zero");
    }
    return out;
}

Tensor symmetrize(const Tensor& m) {
    if (m.rows() != m.cols()) throw DimensionError("symmetrize: non-square matrix " + shape_string(m));
    const std::size_t n = m.rows();
    Tensor out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
    return out;
}

NodeImportance node_scores(const Tensor& symmetric, const GraphRecord& graph) {
    if (symmetric.rows() != graph.num_nodes() || symmetric.cols() != graph.num_nodes()) {
        throw DimensionError("node_scores: matrix " + shape_string(symmetric) + " for graph with " +
                             std::to_string(graph.num_nodes()) + " nodes");
    }
    NodeImportance out;
    out.scores.assign(graph.num_nodes(), 0.0);
    const auto nbrs = neighbor_lists(graph);
    for (std::size_t j = 0; j < graph.num_nodes(); ++j)
        for (std::size_t k : nbrs[j]) out.scores[j] += symmetric(j, k);
    return out;
}

std::vector<double> edge_scores(const Tensor& symmetric, const GraphRecord& graph) {
    std::vector<double> out;
    out.reserve(graph.edges.size());
    for (const Edge& e : graph.edges) out.push_back(symmetric(e.u, e.v));
    return out;
}

EdgeImportance importance_from_edge_scores(const GraphRecord& graph, std::span<const double> scores,
                                           std::uint64_t fingerprint) {
    if (scores.size() != graph.edges.size()) {
        throw ContractError("importance_from_edge_scores: " + std::to_string(scores.size()) + " scores for " +
                            std::to_string(graph.edges.size()) + " edges");
    }
    EdgeImportance out;
    out.graph_id = graph.id;
    out.model_fingerprint = fingerprint;
    out.raw = Tensor(graph.num_nodes(), graph.num_nodes());
    for (std::size_t k = 0; k < scores.size(); ++k) {
        out.raw(graph.edges[k].u, graph.edges[k].v) = scores[k];
        out.raw(graph.edges[k].v, graph.edges[k].u) = scores[k];
    }
    out.symmetric = symmetrize(out.raw);
    return out;
}

void write_importance_cache(const std::filesystem::path& path, std::uint64_t fingerprint,
                            const std::vector<EdgeImportance>& importances, const std::vector<GraphRecord>& graphs) {
    if (importances.size() != graphs.size()) throw ContractError("write_importance_cache: size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "# fingerprint " << fingerprint << '\n';
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const auto scores = edge_scores(importances[i].symmetric, graphs[i]);
        for (std::size_t k = 0; k < scores.size(); ++k) {
            out << graphs[i].id << ',' << graphs[i].edges[k].u << ',' << graphs[i].edges[k].v << ','
                << format_real(scores[k]) << '\n';
        }
    }
}

std::optional<std::map<std::int64_t, std::vector<double>>> read_importance_cache(const std::filesystem::path& path,
                                                                                 std::uint64_t fingerprint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::string header;
    std::getline(in, header);
    if (header != "# fingerprint " + std::to_string(fingerprint)) return std::nullopt;
    std::map<std::int64_t, std::vector<double>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string id, u, v, score;
        std::getline(fields, id, ',');
        std::getline(fields, u, ',');
        std::getline(fields, v, ',');
        std::getline(fields, score);
        out[std::stoll(id)].push_back(std::stod(score));
    }
    return out;
}

}  // namespace disgen
