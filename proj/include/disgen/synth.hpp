#pragma once

#include <cstdint>
#include <vector>

#include "disgen/graph.hpp"
#include "disgen/rng.hpp"

namespace disgen {

/// Two-class benchmark whose label is a colour motif and whose graph size
/// is label-correlated only among small graphs.
///
/// Nodes are red, blue, grey or marker; features are the colour one-hot.
/// Red and blue nodes make up fixed fractions of the graph, so the motif
/// statistic seen through mean pooling does not depend on size, while a
/// fixed number of marker nodes makes size visible (marker share ≈ m/N).
/// Class 1: every red node has a blue neighbour. Class 0: no red–blue edge.
/// All non-grey nodes hang off a random grey tree.
///
/// Half of each class is "small": class 0 draws N from [small0_min,
/// small0_max], class 1 from [small1_min, small1_max] (swapped with
/// probability `flip`). The other half is "large" with N from the same range
/// for both classes. Every large graph is larger than every small graph, so
/// split_by_size puts exactly the small half in the pool.
struct SizeShiftOptions {
    std::size_t per_class = 200;
    std::size_t small0_min = 10, small0_max = 16;
    std::size_t small1_min = 18, small1_max = 26;
    std::size_t large_min = 40, large_max = 64;
    double flip = 0.0;
    double red_fraction = 0.2;
    double blue_fraction = 0.2;
    std::size_t markers = 2;
    double extra_edge_ratio = 0.25;  // extra grey–grey edges per grey node
};

inline constexpr std::size_t kSizeShiftFeatureWidth = 4;

/// Graphs with id == position, classes interleaved.
std::vector<GraphRecord> make_size_shift_dataset(const SizeShiftOptions& options, std::uint64_t seed);

/// One graph of the family with the given size and label.
GraphRecord make_size_shift_graph(std::size_t nodes, std::size_t label, const SizeShiftOptions& options, Rng& rng,
                                  std::int64_t id = 0);

/// Ground-truth motif rule read from the colour features: 1 when red nodes
/// exist and each has a blue neighbour, 0 otherwise.
std::size_t motif_label(const GraphRecord& graph);

}  // namespace disgen
