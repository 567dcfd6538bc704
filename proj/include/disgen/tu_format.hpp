#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "disgen/graph.hpp"

namespace disgen {

/// Graphs read from (or destined for) the TU flat-file layout, plus the
/// schema needed to write them back with their original label values.
///
/// Node features are the one-hot node label (when `<DS>_node_labels.txt`
/// exists) followed by the raw attributes (when `<DS>_node_attributes.txt`
/// exists). With neither file, every node gets the single feature 1.0.
struct TuDataset {
    std::string name;
    std::vector<GraphRecord> graphs;       // record id = 0-based position in the files
    std::vector<long long> graph_label_values;  // dense class index -> label in the file
    std::vector<long long> node_label_values;   // dense index -> node label; empty if absent
    bool has_node_labels = false;
    std::size_t attribute_width = 0;

    std::size_t num_classes() const noexcept { return graph_label_values.size(); }
    std::size_t feature_width() const noexcept;
};

/// Reads `<dir>/<name>_A.txt`, `_graph_indicator.txt`, `_graph_labels.txt`
/// and the optional node label / attribute files. Node ids are remapped to
/// 0-based per-graph ids, directed duplicates collapse to one undirected
/// edge, self-loops are dropped and graph labels become dense 0..C−1.
/// Throws FormatError (with file and line) on malformed input.
TuDataset parse_tu_dataset(const std::filesystem::path& dir, const std::string& name);

/// Writes the dataset in the same layout: LF line endings, ", " between
/// fields, both edge directions in ascending (source, target) order.
void write_tu_dataset(const std::filesystem::path& dir, const TuDataset& data);

/// Dataset sharing `schema`'s label maps but holding other graphs (e.g.
/// augmented views).
TuDataset with_graphs(const TuDataset& schema, std::string name, std::vector<GraphRecord> graphs);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_real(double v);

}  // namespace disgen
