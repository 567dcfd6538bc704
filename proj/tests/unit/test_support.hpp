#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "disgen/backbone.hpp"
#include "disgen/graph.hpp"
#include "disgen/tu_format.hpp"
#include "disgen/rng.hpp"
#include "disgen/tensor.hpp"

namespace disgen::testing {

inline Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = scale * rng.normal();
    return t;
}

/// |a − b| / max(|a|, |b|, 1e-8), the same rule the library's checker uses.
inline double relative_error(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

/// Central differences of a scalar function of one tensor.
inline Tensor numeric_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x, double h = 1e-5) {
    Tensor g(x.rows(), x.cols());
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double up = f(probe);
        probe[i] = x[i] - h;
        const double down = f(probe);
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Graph whose nodes all carry the single feature 1.
inline GraphRecord plain_graph(std::size_t nodes, std::vector<Edge> edges, std::size_t label = 0, std::int64_t id = 0) {
    return make_graph(id, Tensor(nodes, 1, 1.0), std::move(edges), label);
}

inline GraphRecord path_graph(std::size_t nodes, std::size_t label = 0, std::int64_t id = 0) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < nodes; ++i) edges.push_back({i, i + 1});
    return plain_graph(nodes, std::move(edges), label, id);
}

/// Erdős–Rényi graph with random Gaussian features.
inline GraphRecord random_graph(std::size_t nodes, double p, std::size_t width, Rng& rng, std::size_t label = 0,
                                std::int64_t id = 0) {
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < nodes; ++u)
        for (std::size_t v = u + 1; v < nodes; ++v)
            if (rng.uniform() < p) edges.push_back({u, v});
    return make_graph(id, random_tensor(nodes, width, rng), std::move(edges), label);
}

inline std::filesystem::path fixture_dir() { return std::filesystem::path(DISGEN_FIXTURE_DIR); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("disgen-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Zero-weight GCN: logits equal the head bias whatever the graph.
inline PretrainedModel structure_blind_model(std::size_t width) {
    PretrainedModel m;
    m.config.kind = BackboneKind::GCN;
    m.config.layers = 2;
    m.config.hidden = 3;
    m.config.input_width = width;
    Rng rng(0);
    m.params = init_backbone(m.config, rng);
    for (const auto& [path, entry] : m.params.entries()) m.params.mutable_at(path) = Tensor(entry.value.rows(), entry.value.cols());
    m.params.add("head.weight", Tensor(3, 2));
    m.params.add("head.bias", Tensor::from_rows({{0.3, -0.2}}));
    m.params.freeze();
    return m;
}

/// One-layer GIN over (red, blue, grey) one-hot features whose single hidden
/// unit fires only at a red node adjacent to a blue node (and vice versa):
/// relu(agg_red + agg_blue − 1.5). Class 1 logit = 20·mean(unit) − 1.
inline PretrainedModel bridge_model() {
    PretrainedModel m;
    m.config.kind = BackboneKind::GIN;
    m.config.layers = 1;
    m.config.hidden = 1;
    m.config.input_width = 3;
    m.params.add("backbone.layer0.mlp0.weight", Tensor::from_rows({{1}, {1}, {0}}));
    m.params.add("backbone.layer0.mlp0.bias", Tensor::scalar(-1.5));
    m.params.add("backbone.layer0.mlp1.weight", Tensor::scalar(1.0));
    m.params.add("backbone.layer0.mlp1.bias", Tensor::scalar(0.0));
    m.params.add("backbone.layer0.eps", Tensor::scalar(0.0));
    m.params.add("head.weight", Tensor::from_rows({{0.0, 20.0}}));
    m.params.add("head.bias", Tensor::from_rows({{0.0, -1.0}}));
    m.params.freeze();
    return m;
}

/// Path grey–red–blue–grey–…–grey with `nodes` ≥ 4 nodes; edge (1, 2) is
/// the only red–blue bridge.
inline GraphRecord bridge_graph(std::size_t nodes, std::int64_t id = 0) {
    Tensor x(nodes, 3);
    for (std::size_t v = 0; v < nodes; ++v) x(v, 2) = 1.0;
    x(1, 2) = 0.0;
    x(1, 0) = 1.0;
    x(2, 2) = 0.0;
    x(2, 1) = 1.0;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i + 1 < nodes; ++i) edges.push_back({i, i + 1});
    return make_graph(id, std::move(x), std::move(edges), 1);
}

inline TuDataset sizeshift_fixture() { return parse_tu_dataset(fixture_dir() / "sizeshift", "SIZESHIFT"); }

/// GCN pre-trained briefly on the size-shift fixture, shared per process.
inline const PretrainedModel& fixture_model() {
    static const PretrainedModel model = [] {
        const TuDataset d = sizeshift_fixture();
        BackboneConfig config;
        config.hidden = 16;
        config.input_width = d.feature_width();
        PretrainOptions options;
        options.epochs = 40;
        options.learning_rate = 1e-2;
        options.seed = 3;
        return pretrain_backbone(d.graphs, {}, config, d.num_classes(), options, 77);
    }();
    return model;
}

}  // namespace disgen::testing
