#include "disgen/tu_format.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "disgen/error.hpp"

namespace disgen {

namespace fs = std::filesystem;

namespace {

struct Line {
    std::size_t number;
    std::string text;
};

std::vector<Line> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::vector<Line> lines;
    std::string text;
    std::size_t number = 0;
    while (std::getline(in, text)) {
        ++number;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back({number, std::move(text)});
    }
    return lines;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& what) {
    throw FormatError(file.filename().string() + ":" + std::to_string(line) + ": " + what);
}

long long parse_int(std::string_view s, const fs::path& file, std::size_t line) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(file, line, "expected integer, got '" + std::string(s) + "'");
    return v;
}

double parse_real(std::string_view s, const fs::path& file, std::size_t line) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(file, line, "expected real, got '" + std::string(s) + "'");
    return v;
}

fs::path file_for(const fs::path& dir, const std::string& name, const char* suffix) {
    return dir / (name + suffix);
}

}  // namespace

std::size_t TuDataset::feature_width() const noexcept {
    const std::size_t w = (has_node_labels ? node_label_values.size() : 0) + attribute_width;
    return w == 0 ? 1 : w;
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

TuDataset parse_tu_dataset(const fs::path& dir, const std::string& name) {
    const fs::path a_path = file_for(dir, name, "_A.txt");
    const fs::path gi_path = file_for(dir, name, "_graph_indicator.txt");
    const fs::path gl_path = file_for(dir, name, "_graph_labels.txt");
    const fs::path nl_path = file_for(dir, name, "_node_labels.txt");
    const fs::path na_path = file_for(dir, name, "_node_attributes.txt");

    // Node -> graph membership.
    const auto gi_lines = read_lines(gi_path);
    const std::size_t total_nodes = gi_lines.size();
    std::vector<std::size_t> node_graph(total_nodes);
    std::vector<std::size_t> node_local(total_nodes);
    long long max_graph = 0;
    for (std::size_t i = 0; i < total_nodes; ++i) {
        const long long g = parse_int(trim(gi_lines[i].text), gi_path, gi_lines[i].number);
        if (g < 1) fail(gi_path, gi_lines[i].number, "graph id must be >= 1");
        max_graph = std::max(max_graph, g);
        node_graph[i] = static_cast<std::size_t>(g - 1);
    }
    const std::size_t graph_count = static_cast<std::size_t>(max_graph);
    std::vector<std::size_t> graph_sizes(graph_count, 0);
    for (std::size_t i = 0; i < total_nodes; ++i) node_local[i] = graph_sizes[node_graph[i]]++;
    for (std::size_t g = 0; g < graph_count; ++g) {
        if (graph_sizes[g] == 0) throw FormatError(gi_path.filename().string() + ": graph " + std::to_string(g + 1) + " has no nodes");
    }

    // Graph labels.
    const auto gl_lines = read_lines(gl_path);
    if (gl_lines.size() != graph_count) {
        throw FormatError(gl_path.filename().string() + ": " + std::to_string(gl_lines.size()) +
                          " labels for " + std::to_string(graph_count) + " graphs");
    }
    std::vector<long long> raw_labels;
    for (const auto& l : gl_lines) raw_labels.push_back(parse_int(trim(l.text), gl_path, l.number));

    TuDataset data;
    data.name = name;
    data.graph_label_values = raw_labels;
    std::sort(data.graph_label_values.begin(), data.graph_label_values.end());
    data.graph_label_values.erase(std::unique(data.graph_label_values.begin(), data.graph_label_values.end()),
                                  data.graph_label_values.end());

    // Optional node labels.
    std::vector<long long> node_labels;
    if (fs::exists(nl_path)) {
        const auto lines = read_lines(nl_path);
        if (lines.size() != total_nodes) {
            throw FormatError(nl_path.filename().string() + ": " + std::to_string(lines.size()) + " labels for " +
                              std::to_string(total_nodes) + " nodes");
        }
        for (const auto& l : lines) {
            // Some TU sets carry several label columns; the first is the node label.
            node_labels.push_back(parse_int(split_fields(l.text).front(), nl_path, l.number));
        }
        data.has_node_labels = true;
        data.node_label_values = node_labels;
        std::sort(data.node_label_values.begin(), data.node_label_values.end());
        data.node_label_values.erase(std::unique(data.node_label_values.begin(), data.node_label_values.end()),
                                     data.node_label_values.end());
    }

    // Optional attributes.
    std::vector<std::vector<double>> attributes;
    if (fs::exists(na_path)) {
        const auto lines = read_lines(na_path);
        if (lines.size() != total_nodes) {
            throw FormatError(na_path.filename().string() + ": " + std::to_string(lines.size()) +
                              " attribute rows for " + std::to_string(total_nodes) + " nodes");
        }
        for (const auto& l : lines) {
            std::vector<double> row;
            for (auto f : split_fields(l.text)) row.push_back(parse_real(f, na_path, l.number));
            if (!attributes.empty() && row.size() != attributes.front().size()) {
                fail(na_path, l.number, "attribute width " + std::to_string(row.size()) + " differs from " +
                                            std::to_string(attributes.front().size()));
            }
            attributes.push_back(std::move(row));
        }
        data.attribute_width = attributes.empty() ? 0 : attributes.front().size();
    }

    // Edges.
    std::vector<std::vector<Edge>> edges(graph_count);
    for (const auto& l : read_lines(a_path)) {
        const auto fields = split_fields(l.text);
        if (fields.size() != 2) fail(a_path, l.number, "expected 'u, v'");
        const long long u = parse_int(fields[0], a_path, l.number);
        const long long v = parse_int(fields[1], a_path, l.number);
        for (long long x : {u, v}) {
            if (x < 1 || static_cast<std::size_t>(x) > total_nodes) {
                fail(a_path, l.number, "node " + std::to_string(x) + " missing from " + gi_path.filename().string());
            }
        }
        const std::size_t gu = node_graph[u - 1], gv = node_graph[v - 1];
        if (gu != gv) fail(a_path, l.number, "edge joins nodes of different graphs");
        if (u == v) continue;
        edges[gu].push_back({node_local[u - 1], node_local[v - 1]});
    }

    // Assemble records.
    const std::size_t width = data.feature_width();
    std::vector<Tensor> features;
    features.reserve(graph_count);
    for (std::size_t g = 0; g < graph_count; ++g) features.emplace_back(graph_sizes[g], width);
    const std::size_t label_width = data.has_node_labels ? data.node_label_values.size() : 0;
    for (std::size_t i = 0; i < total_nodes; ++i) {
        Tensor& x = features[node_graph[i]];
        const std::size_t row = node_local[i];
        if (label_width == 0 && data.attribute_width == 0) {
            x(row, 0) = 1.0;
            continue;
        }
        if (label_width) {
            const auto it = std::lower_bound(data.node_label_values.begin(), data.node_label_values.end(), node_labels[i]);
            x(row, static_cast<std::size_t>(it - data.node_label_values.begin())) = 1.0;
        }
        for (std::size_t c = 0; c < data.attribute_width; ++c) x(row, label_width + c) = attributes[i][c];
    }
    data.graphs.reserve(graph_count);
    for (std::size_t g = 0; g < graph_count; ++g) {
        const auto it = std::lower_bound(data.graph_label_values.begin(), data.graph_label_values.end(), raw_labels[g]);
        const auto label = static_cast<std::size_t>(it - data.graph_label_values.begin());
        data.graphs.push_back(make_graph(static_cast<std::int64_t>(g), std::move(features[g]), std::move(edges[g]), label));
    }
    return data;
}

void write_tu_dataset(const fs::path& dir, const TuDataset& data) {
    fs::create_directories(dir);
    const std::size_t label_width = data.has_node_labels ? data.node_label_values.size() : 0;
    if (data.feature_width() == 0) throw ContractError("write_tu_dataset: empty feature schema");

    std::ostringstream a, gi, gl, nl, na;
    std::size_t base = 1;
    for (std::size_t gidx = 0; gidx < data.graphs.size(); ++gidx) {
        const GraphRecord& g = data.graphs[gidx];
        if (g.feature_width() != data.feature_width()) {
            throw DimensionError("write_tu_dataset: graph " + std::to_string(g.id) + " has feature width " +
                                 std::to_string(g.feature_width()) + ", schema expects " +
                                 std::to_string(data.feature_width()));
        }
        if (g.label >= data.graph_label_values.size()) {
            throw ContractError("write_tu_dataset: graph label " + std::to_string(g.label) + " outside schema");
        }
        const auto nbrs = neighbor_lists(g);
        for (std::size_t u = 0; u < g.num_nodes(); ++u)
            for (std::size_t v : nbrs[u]) a << (base + u) << ", " << (base + v) << '\n';
        for (std::size_t u = 0; u < g.num_nodes(); ++u) {
            gi << (gidx + 1) << '\n';
            if (label_width) {
                std::size_t hot = 0;
                for (std::size_t c = 1; c < label_width; ++c)
                    if (g.features(u, c) > g.features(u, hot)) hot = c;
                nl << data.node_label_values[hot] << '\n';
            }
            if (data.attribute_width) {
                for (std::size_t c = 0; c < data.attribute_width; ++c) {
                    if (c) na << ", ";
                    na << format_real(g.features(u, label_width + c));
                }
                na << '\n';
            }
        }
        gl << data.graph_label_values[g.label] << '\n';
        base += g.num_nodes();
    }

    auto put = [&](const char* suffix, const std::string& content) {
        std::ofstream out(file_for(dir, data.name, suffix), std::ios::binary);
        if (!out) throw FormatError("cannot write " + file_for(dir, data.name, suffix).string());
        out << content;
    };
    put("_A.txt", a.str());
    put("_graph_indicator.txt", gi.str());
    put("_graph_labels.txt", gl.str());
    if (label_width) put("_node_labels.txt", nl.str());
    if (data.attribute_width) put("_node_attributes.txt", na.str());
}

TuDataset with_graphs(const TuDataset& schema, std::string name, std::vector<GraphRecord> graphs) {
    TuDataset out = schema;
    out.name = std::move(name);
    out.graphs = std::move(graphs);
    return out;
}

}  // namespace disgen
