#include "disgen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "disgen/error.hpp"

namespace disgen {

namespace {

enum Colour : std::size_t { kRed = 0, kBlue = 1, kGrey = 2, kMarker = 3 };

std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng.index(hi - lo + 1)); }

std::size_t colour_of(const GraphRecord& g, std::size_t node) {
    for (std::size_t c = 0; c < kSizeShiftFeatureWidth; ++c)
        if (g.features(node, c) == 1.0) return c;
    return kGrey;
}

}  // namespace

GraphRecord make_size_shift_graph(std::size_t nodes, std::size_t label, const SizeShiftOptions& o, Rng& rng,
                                  std::int64_t id) {
    auto share = [nodes](double f) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(nodes))));
    };
    const std::size_t reds = share(o.red_fraction);
    const std::size_t blues = share(o.blue_fraction);
    if (reds + blues + o.markers >= nodes) {
        throw ContractError("size-shift graph: " + std::to_string(nodes) + " nodes leave no room for grey filler");
    }
    const std::size_t greys = nodes - reds - blues - o.markers;

    // Local layout: greys, reds, blues, markers; permuted at the end.
    std::vector<Edge> edges;
    for (std::size_t k = 1; k < greys; ++k) edges.push_back({static_cast<std::size_t>(rng.index(k)), k});
    const auto extra = static_cast<std::size_t>(std::llround(o.extra_edge_ratio * static_cast<double>(greys)));
    for (std::size_t k = 0; k < extra && greys > 2; ++k) {
        const std::size_t a = rng.index(greys), b = rng.index(greys);
        if (a != b) edges.push_back({a, b});
    }
    for (std::size_t k = greys; k < nodes; ++k) edges.push_back({static_cast<std::size_t>(rng.index(greys)), k});
    if (label == 1) {
        for (std::size_t r = greys; r < greys + reds; ++r) {
            edges.push_back({r, greys + reds + static_cast<std::size_t>(rng.index(blues))});
        }
    }

    std::vector<std::size_t> perm(nodes);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Tensor features(nodes, kSizeShiftFeatureWidth);
    for (std::size_t k = 0; k < nodes; ++k) {
        Colour c = kMarker;
        if (k < greys) c = kGrey;
        else if (k < greys + reds) c = kRed;
        else if (k < greys + reds + blues) c = kBlue;
        features(perm[k], c) = 1.0;
    }
    for (Edge& e : edges) e = {perm[e.u], perm[e.v]};
    return make_graph(id, std::move(features), std::move(edges), label);
}

std::vector<GraphRecord> make_size_shift_dataset(const SizeShiftOptions& o, std::uint64_t seed) {
    if (o.small0_max >= o.large_min || o.small1_max >= o.large_min) {
        throw ContractError("size-shift dataset: small sizes must stay below large_min");
    }
    Rng rng(seed);
    std::vector<GraphRecord> out;
    out.reserve(2 * o.per_class);
    const std::size_t small_count = o.per_class / 2;
    for (std::size_t i = 0; i < o.per_class; ++i) {
        for (std::size_t label = 0; label < 2; ++label) {
            std::size_t n = 0;
            if (i < small_count) {
                std::size_t regime = label;
                if (rng.uniform() < o.flip) regime = 1 - regime;
                n = regime == 0 ? draw(rng, o.small0_min, o.small0_max) : draw(rng, o.small1_min, o.small1_max);
            } else {
                n = draw(rng, o.large_min, o.large_max);
            }
            out.push_back(make_size_shift_graph(n, label, o, rng, static_cast<std::int64_t>(out.size())));
        }
    }
    return out;
}

std::size_t motif_label(const GraphRecord& graph) {
    const auto nbrs = neighbor_lists(graph);
    bool any_red = false;
    for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
        if (colour_of(graph, v) != kRed) continue;
        any_red = true;
        const bool linked = std::any_of(nbrs[v].begin(), nbrs[v].end(),
                                        [&](std::size_t u) { return colour_of(graph, u) == kBlue; });
        if (!linked) return 0;
    }
    return any_red ? 1 : 0;
}

}  // namespace disgen
