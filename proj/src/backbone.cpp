#include "disgen/backbone.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "disgen/early_stop.hpp"
#include "disgen/error.hpp"
#include "disgen/tu_format.hpp"

namespace disgen {

std::string to_string(BackboneKind kind) { return kind == BackboneKind::GCN ? "GCN" : "GIN"; }

BackboneKind parse_backbone_kind(const std::string& text) {
    if (text == "GCN" || text == "gcn") return BackboneKind::GCN;
    if (text == "GIN" || text == "gin") return BackboneKind::GIN;
    throw ConfigError("unknown backbone kind '" + text + "'");
}

void BackboneConfig::validate() const {
    if (layers < 1) throw ContractError("backbone: layer count must be >= 1");
    if (hidden < 1 || input_width < 1) throw ContractError("backbone: widths must be >= 1");
}

namespace {

std::string layer_path(const std::string& prefix, std::size_t i, const char* leaf) {
    return prefix + ".layer" + std::to_string(i) + "." + leaf;
}

}  // namespace

ParameterSet init_backbone(const BackboneConfig& config, Rng& rng, const std::string& prefix) {
    config.validate();
    ParameterSet params;
    std::size_t in = config.input_width;
    for (std::size_t i = 0; i < config.layers; ++i) {
        if (config.kind == BackboneKind::GCN) {
            params.add(layer_path(prefix, i, "weight"), glorot_uniform(in, config.hidden, rng));
            params.add(layer_path(prefix, i, "bias"), Tensor(1, config.hidden));
        } else {
            params.add(layer_path(prefix, i, "mlp0.weight"), glorot_uniform(in, config.hidden, rng));
            params.add(layer_path(prefix, i, "mlp0.bias"), Tensor(1, config.hidden));
            params.add(layer_path(prefix, i, "mlp1.weight"), glorot_uniform(config.hidden, config.hidden, rng));
            params.add(layer_path(prefix, i, "mlp1.bias"), Tensor(1, config.hidden));
            params.add(layer_path(prefix, i, "eps"), Tensor(1, 1));
        }
        in = config.hidden;
    }
    return params;
}

Var add_bias(Var x, Var bias) {
    Tape& tape = *x.tape();
    if (bias.value().rows() != 1 || bias.value().cols() != x.value().cols()) {
        throw DimensionError("add_bias: bias " + shape_string(bias.value()) + " for input " + shape_string(x.value()));
    }
    Var ones = tape.constant(Tensor(x.value().rows(), 1, 1.0));
    return ops::add(x, ops::matmul(ones, bias));
}

Var gcn_layer(Var h, std::shared_ptr<const BlockDiagonal> normalized, Var weight, std::optional<Var> bias,
              bool activate) {
    if (h.value().cols() != weight.value().rows()) {
        throw DimensionError("gcn_layer: features " + shape_string(h.value()) + " vs weight " +
                             shape_string(weight.value()));
    }
    Var out = ops::matmul(ops::block_matmul(std::move(normalized), h), weight);
    if (bias) out = add_bias(out, *bias);
    return activate ? ops::relu(out) : out;
}

Var gin_layer(Var h, std::shared_ptr<const BlockDiagonal> adjacency, const GinWeights& w, bool activate) {
    if (h.value().cols() != w.w1.value().rows()) {
        throw DimensionError("gin_layer: features " + shape_string(h.value()) + " vs weight " +
                             shape_string(w.w1.value()));
    }
    // (1 + ε)h + Σ_nbr h  ==  h + ε·h + A h
    Var aggregated = ops::add(ops::add(h, ops::scale_by(w.eps, h)), ops::block_matmul(std::move(adjacency), h));
    Var hidden = ops::relu(add_bias(ops::matmul(aggregated, w.w1), w.b1));
    Var out = add_bias(ops::matmul(hidden, w.w2), w.b2);
    return activate ? ops::relu(out) : out;
}

Var backbone_nodes(Tape& tape, const ParameterSet& params, const BackboneConfig& config, const GraphBatch& batch,
                   const std::string& prefix) {
    if (batch.features.cols() != config.input_width) {
        throw DimensionError("backbone: feature width " + std::to_string(batch.features.cols()) + ", config expects " +
                             std::to_string(config.input_width));
    }
    Var h = tape.constant(batch.features);
    const auto blocks = config.kind == BackboneKind::GCN ? batch.normalized_blocks() : batch.adjacency_blocks();
    for (std::size_t i = 0; i < config.layers; ++i) {
        const bool activate = i + 1 < config.layers;
        if (config.kind == BackboneKind::GCN) {
            h = gcn_layer(h, blocks, tape.parameter(params, layer_path(prefix, i, "weight")),
                          tape.parameter(params, layer_path(prefix, i, "bias")), activate);
        } else {
            GinWeights w{tape.parameter(params, layer_path(prefix, i, "mlp0.weight")),
                         tape.parameter(params, layer_path(prefix, i, "mlp0.bias")),
                         tape.parameter(params, layer_path(prefix, i, "mlp1.weight")),
                         tape.parameter(params, layer_path(prefix, i, "mlp1.bias")),
                         tape.parameter(params, layer_path(prefix, i, "eps"))};
            h = gin_layer(h, blocks, w, activate);
        }
    }
    return h;
}

Var mean_pool(Var nodes, const GraphBatch& batch) { return ops::segment_mean(nodes, batch.offsets); }

Prediction prediction_from_logits(std::span<const double> logits) {
    Tensor row(1, logits.size(), std::vector<double>(logits.begin(), logits.end()));
    const Tensor p = softmax_rows(row);
    Prediction out;
    out.probabilities.assign(p.values().begin(), p.values().end());
    for (std::size_t c = 1; c < logits.size(); ++c)
        if (logits[c] > logits[out.label]) out.label = c;
    return out;
}

namespace {

Var head_logits(Tape& tape, const ParameterSet& params, const BackboneConfig& config, const GraphBatch& batch) {
    Var pooled = mean_pool(backbone_nodes(tape, params, config, batch), batch);
    return add_bias(ops::matmul(pooled, tape.parameter(params, "head.weight")), tape.parameter(params, "head.bias"));
}

std::vector<std::size_t> labels_of(const GraphBatch& batch) {
    std::vector<std::size_t> y;
    y.reserve(batch.graphs.size());
    for (const auto& g : batch.graphs) y.push_back(g.label);
    return y;
}

double mean_loss(const ParameterSet& params, const BackboneConfig& config, std::span<const GraphRecord> graphs,
                 std::size_t chunk) {
    double total = 0.0;
    for (std::size_t start = 0; start < graphs.size(); start += chunk) {
        const std::size_t end = std::min(graphs.size(), start + chunk);
        GraphBatch batch = assemble_graphs({graphs.begin() + start, graphs.begin() + end});
        Tape tape;
        total += pretrain_loss(tape, params, config, batch).value().item() * static_cast<double>(end - start);
    }
    return total / static_cast<double>(graphs.size());
}

}  // namespace

Var pretrain_loss(Tape& tape, const ParameterSet& params, const BackboneConfig& config, const GraphBatch& batch) {
    const auto y = labels_of(batch);
    return ops::softmax_cross_entropy(head_logits(tape, params, config, batch), y);
}

Tensor PretrainedModel::logits(std::span<const GraphRecord> graphs) const {
    Tensor out(graphs.size(), num_classes);
    constexpr std::size_t kChunk = 256;
    for (std::size_t start = 0; start < graphs.size(); start += kChunk) {
        const std::size_t end = std::min(graphs.size(), start + kChunk);
        GraphBatch batch = assemble_graphs({graphs.begin() + start, graphs.begin() + end});
        Tape tape;
        const Tensor& l = head_logits(tape, params, config, batch).value();
        std::copy_n(l.data(), l.size(), out.data() + start * num_classes);
    }
    return out;
}

Prediction predict_label(const PretrainedModel& model, const GraphRecord& graph) {
    if (graph.feature_width() != model.config.input_width) {
        throw DimensionError("predict_label: graph feature width " + std::to_string(graph.feature_width()) +
                             ", model expects " + std::to_string(model.config.input_width));
    }
    const Tensor l = model.logits(std::span<const GraphRecord>(&graph, 1));
    return prediction_from_logits(l.values());
}

PretrainedModel pretrain_backbone(std::span<const GraphRecord> train, std::span<const GraphRecord> validation,
                                  const BackboneConfig& config, std::size_t num_classes, const PretrainOptions& options,
                                  std::uint64_t fingerprint) {
    if (train.empty()) throw ContractError("pretrain_backbone: empty training set");
    if (options.batch_size == 0) throw ContractError("pretrain_backbone: batch size must be positive");
    config.validate();

    Rng rng(options.seed);
    PretrainedModel model;
    model.config = config;
    model.num_classes = num_classes;
    model.fingerprint = fingerprint;
    model.params = init_backbone(config, rng);
    model.params.add("head.weight", glorot_uniform(config.hidden, num_classes, rng));
    model.params.add("head.bias", Tensor(1, num_classes));

    AdamConfig adam;
    adam.learning_rate = options.learning_rate;
    ParameterSet best = model.params;
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
            const std::size_t end = std::min(order.size(), start + options.batch_size);
            std::vector<GraphRecord> graphs;
            for (std::size_t i = start; i < end; ++i) graphs.push_back(train[order[i]]);
            GraphBatch batch = assemble_graphs(std::move(graphs));
            Tape tape;
            Var loss = pretrain_loss(tape, model.params, config, batch);
            const double value = loss.value().item();
            if (!std::isfinite(value)) {
                throw TrainingError("pretrain_backbone: non-finite loss at epoch " + std::to_string(epoch));
            }
            epoch_loss += value * static_cast<double>(end - start);
            adam_step(model.params, tape.backward(loss), adam);
        }
        model.train_losses.push_back(epoch_loss / static_cast<double>(train.size()));

        if (!validation.empty()) {
            model.validation_losses.push_back(mean_loss(model.params, config, validation, 256));
            const EarlyStopDecision d = early_stop_check(model.validation_losses, options.patience);
            if (d.best_epoch + 1 == model.validation_losses.size()) best = model.params;
            model.best_epoch = d.best_epoch;
            if (d.stop) break;
        } else {
            best = model.params;
            model.best_epoch = epoch;
        }
    }

    if (options.epochs > 0) model.params = best;
    model.params.freeze();
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const PretrainedModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write checkpoint " + path.string());
    out << "disgen-checkpoint 1\n";
    out << "kind " << to_string(model.config.kind) << '\n';
    out << "layers " << model.config.layers << '\n';
    out << "hidden " << model.config.hidden << '\n';
    out << "input_width " << model.config.input_width << '\n';
    out << "classes " << model.num_classes << '\n';
    out << "fingerprint " << model.fingerprint << '\n';
    out << "tensors " << model.params.size() << '\n';
    for (const auto& [name, entry] : model.params.entries()) {
        const Tensor& t = entry.value;
        out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
        for (std::size_t i = 0; i < t.size(); ++i) out << (i ? " " : "") << format_real(t[i]);
        out << '\n';
    }
}

PretrainedModel load_checkpoint(const std::filesystem::path& path, std::optional<std::uint64_t> expected_fingerprint,
                                bool allow_mismatch) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingDependencyError("checkpoint not found: " + path.string());
    auto expect = [&](const char* key) {
        std::string k;
        if (!(in >> k) || k != key) throw FormatError(path.string() + ": expected '" + key + "'");
    };
    expect("disgen-checkpoint");
    int version = 0;
    in >> version;
    if (version != 1) throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));

    PretrainedModel model;
    std::string kind;
    std::size_t count = 0;
    expect("kind");
    in >> kind;
    model.config.kind = parse_backbone_kind(kind);
    expect("layers");
    in >> model.config.layers;
    expect("hidden");
    in >> model.config.hidden;
    expect("input_width");
    in >> model.config.input_width;
    expect("classes");
    in >> model.num_classes;
    expect("fingerprint");
    in >> model.fingerprint;
    expect("tensors");
    in >> count;
    for (std::size_t k = 0; k < count; ++k) {
        std::string name;
        std::size_t rows = 0, cols = 0;
        expect("tensor");
        in >> name >> rows >> cols;
        std::vector<double> values(rows * cols);
        for (double& v : values) {
            std::string text;
            in >> text;
            try {
                v = std::stod(text);
            } catch (const std::exception&) {
                throw FormatError(path.string() + ": bad value in tensor '" + name + "'");
            }
        }
        if (!in) throw FormatError(path.string() + ": truncated tensor '" + name + "'");
        model.params.add(name, Tensor(rows, cols, std::move(values)));
    }
    if (expected_fingerprint && *expected_fingerprint != model.fingerprint && !allow_mismatch) {
        throw FingerprintError("checkpoint fingerprint " + std::to_string(model.fingerprint) +
                               " does not match the active split (" + std::to_string(*expected_fingerprint) + ")");
    }
    model.params.freeze();
    return model;
}

}  // namespace disgen
