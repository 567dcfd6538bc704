#include "disgen/graph.hpp"

#include <algorithm>
#include <cmath>

#include "disgen/error.hpp"

namespace disgen {

GraphRecord make_graph(std::int64_t id, Tensor features, std::vector<Edge> edges, std::size_t label) {
    const std::size_t n = features.rows();
    if (n == 0) throw ContractError("graph " + std::to_string(id) + ": must have at least one node");
    for (Edge& e : edges) {
        if (e.u == e.v) throw ContractError("graph " + std::to_string(id) + ": self-loop on node " + std::to_string(e.u));
        if (e.u >= n || e.v >= n) {
            throw ContractError("graph " + std::to_string(id) + ": edge (" + std::to_string(e.u) + "," +
                                std::to_string(e.v) + ") out of range for N=" + std::to_string(n));
        }
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return GraphRecord{id, std::move(features), std::move(edges), label};
}

void validate(const GraphRecord& g) {
    if (g.num_nodes() == 0) throw ContractError("graph " + std::to_string(g.id) + ": no nodes");
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const Edge& e = g.edges[i];
        if (!(e.u < e.v) || e.v >= g.num_nodes()) {
            throw ContractError("graph " + std::to_string(g.id) + ": invalid edge (" + std::to_string(e.u) + "," +
                                std::to_string(e.v) + ")");
        }
        if (i > 0 && !(g.edges[i - 1] < e)) {
            throw ContractError("graph " + std::to_string(g.id) + ": edges not sorted/unique");
        }
    }
}

std::vector<std::vector<std::size_t>> neighbor_lists(const GraphRecord& g) {
    std::vector<std::vector<std::size_t>> nbrs(g.num_nodes());
    for (const Edge& e : g.edges) {
        nbrs[e.u].push_back(e.v);
        nbrs[e.v].push_back(e.u);
    }
    for (auto& list : nbrs) std::sort(list.begin(), list.end());
    return nbrs;
}

Tensor adjacency_matrix(const GraphRecord& g) {
    const std::size_t n = g.num_nodes();
    Tensor a(n, n);
    for (const Edge& e : g.edges) a(e.u, e.v) = a(e.v, e.u) = 1.0;
    return a;
}

Tensor normalize_adjacency(const GraphRecord& g) {
    const std::size_t n = g.num_nodes();
    std::vector<double> degree(n, 1.0);
    for (const Edge& e : g.edges) {
        degree[e.u] += 1.0;
        degree[e.v] += 1.0;
    }
    // 1/√(d_u·d_v) in one rounding keeps small cases exact (e.g. 1/√4 = 0.5).
    Tensor a(n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0 / degree[i];
    for (const Edge& e : g.edges) a(e.u, e.v) = a(e.v, e.u) = 1.0 / std::sqrt(degree[e.u] * degree[e.v]);
    return a;
}

GraphRecord remove_edges(const GraphRecord& g, std::span<const Edge> removed) {
    std::vector<Edge> drop(removed.begin(), removed.end());
    for (Edge& e : drop)
        if (e.u > e.v) std::swap(e.u, e.v);
    std::sort(drop.begin(), drop.end());
    GraphRecord out{g.id, g.features, {}, g.label};
    out.edges.reserve(g.edges.size());
    for (const Edge& e : g.edges)
        if (!std::binary_search(drop.begin(), drop.end(), e)) out.edges.push_back(e);
    return out;
}

GraphRecord remove_nodes(const GraphRecord& g, std::span<const std::size_t> removed) {
    const std::size_t n = g.num_nodes();
    std::vector<bool> gone(n, false);
    for (std::size_t v : removed) {
        if (v >= n) throw ContractError("remove_nodes: node " + std::to_string(v) + " out of range");
        gone[v] = true;
    }
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> remap(n, kNone);
    std::size_t kept = 0;
    for (std::size_t v = 0; v < n; ++v)
        if (!gone[v]) remap[v] = kept++;
    if (kept == 0) throw ContractError("remove_nodes: cannot remove every node of graph " + std::to_string(g.id));

    Tensor features(kept, g.feature_width());
    for (std::size_t v = 0; v < n; ++v) {
        if (gone[v]) continue;
        for (std::size_t c = 0; c < g.feature_width(); ++c) features(remap[v], c) = g.features(v, c);
    }
    std::vector<Edge> edges;
    for (const Edge& e : g.edges)
        if (!gone[e.u] && !gone[e.v]) edges.push_back({remap[e.u], remap[e.v]});
    // Order-preserving remap keeps edges sorted with u < v.
    return GraphRecord{g.id, std::move(features), std::move(edges), g.label};
}

GraphRecord permute_nodes(const GraphRecord& g, std::span<const std::size_t> perm) {
    const std::size_t n = g.num_nodes();
    if (perm.size() != n) throw ContractError("permute_nodes: permutation length mismatch");
    Tensor features(n, g.feature_width());
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t c = 0; c < g.feature_width(); ++c) features(perm[v], c) = g.features(v, c);
    std::vector<Edge> edges;
    edges.reserve(g.edges.size());
    for (const Edge& e : g.edges) edges.push_back({perm[e.u], perm[e.v]});
    return make_graph(g.id, std::move(features), std::move(edges), g.label);
}

}  // namespace disgen
