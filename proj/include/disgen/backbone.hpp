#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disgen/batch.hpp"
#include "disgen/params.hpp"
#include "disgen/tape.hpp"

namespace disgen {

enum class BackboneKind { GCN, GIN };

std::string to_string(BackboneKind kind);
BackboneKind parse_backbone_kind(const std::string& text);

/// Message-passing stack followed by global mean pooling.
struct BackboneConfig {
    BackboneKind kind = BackboneKind::GCN;
    std::size_t layers = 3;
    std::size_t hidden = 64;      // d_g, width of every layer
    std::size_t input_width = 1;  // d_f

    void validate() const;
    bool operator==(const BackboneConfig&) const = default;
};

/// Glorot weights, zero biases, GIN ε = 0. Paths are `<prefix>.layer<i>.*`.
ParameterSet init_backbone(const BackboneConfig& config, Rng& rng, const std::string& prefix = "backbone");

/// x + 1·bᵀ, with the row broadcast written as an explicit matmul.
Var add_bias(Var x, Var bias);

/// relu(Â H W + b) (no relu when `activate` is false).
Var gcn_layer(Var h, std::shared_ptr<const BlockDiagonal> normalized, Var weight, std::optional<Var> bias,
              bool activate);

struct GinWeights {
    Var w1, b1, w2, b2, eps;
};

/// MLP((1 + ε)·h_v + Σ_{u∈N(v)} h_u); MLP = Linear → relu → Linear.
/// Neighbour sums run in ascending index order.
Var gin_layer(Var h, std::shared_ptr<const BlockDiagonal> adjacency, const GinWeights& weights, bool activate);

/// Node embeddings (N_total × d_g) for every graph in the batch. The final
/// layer is not passed through relu.
Var backbone_nodes(Tape& tape, const ParameterSet& params, const BackboneConfig& config, const GraphBatch& batch,
                   const std::string& prefix = "backbone");

/// Per-graph arithmetic mean of node rows (graph_count × d).
Var mean_pool(Var nodes, const GraphBatch& batch);

/// Argmax over softmax probabilities; ties go to the lower class index.
struct Prediction {
    std::size_t label = 0;
    std::vector<double> probabilities;
};
Prediction prediction_from_logits(std::span<const double> logits);

/// Backbone + linear classification head, frozen after pre-training.
struct PretrainedModel {
    BackboneConfig config;
    std::size_t num_classes = 2;
    ParameterSet params;  // backbone.* and head.*
    std::uint64_t fingerprint = 0;
    std::vector<double> train_losses;
    std::vector<double> validation_losses;
    std::size_t best_epoch = 0;

    /// Logits for every graph, one row per graph, in a single batched pass.
    Tensor logits(std::span<const GraphRecord> graphs) const;
};

Prediction predict_label(const PretrainedModel& model, const GraphRecord& graph);

struct PretrainOptions {
    std::size_t epochs = 300;
    std::size_t patience = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

/// Trains backbone + head with cross-entropy and Adam, keeping the
/// parameters from the lowest-validation-loss epoch (or the last epoch when
/// no validation graphs are given). Throws TrainingError on a NaN loss.
PretrainedModel pretrain_backbone(std::span<const GraphRecord> train, std::span<const GraphRecord> validation,
                                  const BackboneConfig& config, std::size_t num_classes, const PretrainOptions& options,
                                  std::uint64_t fingerprint);

/// Cross-entropy of backbone + head on a batch; the pre-training objective.
Var pretrain_loss(Tape& tape, const ParameterSet& params, const BackboneConfig& config, const GraphBatch& batch);

/// Text checkpoint: header, config, fingerprint, then one block per tensor.
void save_checkpoint(const std::filesystem::path& path, const PretrainedModel& model);

/// Loads a checkpoint. When `expected_fingerprint` is set and differs from
/// the stored one, throws FingerprintError unless `allow_mismatch`.
PretrainedModel load_checkpoint(const std::filesystem::path& path,
                                std::optional<std::uint64_t> expected_fingerprint = std::nullopt,
                                bool allow_mismatch = false);

}  // namespace disgen
