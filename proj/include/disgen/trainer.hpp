#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "disgen/backbone.hpp"
#include "disgen/batch.hpp"
#include "disgen/config.hpp"
#include "disgen/disentangle.hpp"

namespace disgen {

/// Backbone + both encoders + both heads.
struct TrainedModel {
    BackboneConfig backbone;
    HeadConfig heads;
    ParameterSet params;

    /// Task-head logits, one row per graph.
    Tensor logits(std::span<const GraphRecord> graphs) const;
    std::vector<std::size_t> predict(std::span<const GraphRecord> graphs) const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_total = 0.0;  // batch-size-weighted means over the epoch
    double train_size_loss = 0.0;
    double train_task_loss = 0.0;
    double train_decoupling_loss = 0.0;
    double train_residual = 0.0;
    double validation_loss = 0.0;
};

struct MetricsReport {
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::vector<EpochRecord> epochs;
    std::vector<LossBreakdown> steps;
    std::size_t best_epoch = 0;
    LossBreakdown best_breakdown;  // epoch means at the best epoch
    double small_test_f1 = 0.0;
    double large_test_f1 = 0.0;
    std::size_t zero_norm_size_rows = 0;
    bool aborted = false;
    std::string diagnostic;
    double wall_seconds = 0.0;  // not part of metrics.json
};

struct TrainOutcome {
    TrainedModel model;
    MetricsReport report;
};

/// Minimises the DisGen objective with Adam over batches of `batch_size`
/// triples, reshuffled each epoch from the config seed. Validation loss is
/// the task head's cross-entropy on the validation originals; the returned
/// parameters come from the epoch with the lowest validation loss (earliest
/// on ties). A non-finite objective stops training, keeps the last good
/// parameters and sets report.aborted.
///
/// `warm_start`, when given and config.warm_start is set, seeds the backbone
/// from the pretrained explainer model (requires matching backbone shapes).
TrainOutcome train_disgen(std::span<const ViewTriple> triples, std::span<const GraphRecord> validation,
                          std::size_t num_classes, const RunConfig& config,
                          const PretrainedModel* warm_start = nullptr);

BackboneConfig backbone_config(const RunConfig& config, std::size_t input_width);
HeadConfig head_config(const RunConfig& config, std::size_t num_classes);
LossWeights loss_weights(const RunConfig& config);

/// Macro-averaged F₁ over classes 0..num_classes−1; 0/0 precision or recall
/// counts as 0.
double macro_f1(std::span<const std::size_t> truth, std::span<const std::size_t> predicted, std::size_t num_classes);

/// Macro F₁ of the task head. Throws ContractError on an empty set.
double evaluate_f1(const TrainedModel& model, std::span<const GraphRecord> graphs);

/// Mean task-head cross-entropy over `graphs`.
double task_cross_entropy(const TrainedModel& model, std::span<const GraphRecord> graphs);

/// metrics.json content. Deterministic given the run (no timings).
std::string metrics_json(const MetricsReport& report);

/// Writes metrics.json, epochs.csv, losses.csv and config.json into `dir`
/// (created if needed), plus timing.json with the wall-clock time.
void write_run_outputs(const std::filesystem::path& dir, const RunConfig& config, const MetricsReport& report);

/// `step,L_s,L_t,L_d,D,total` rows.
void write_losses_csv(const std::filesystem::path& path, std::span<const LossBreakdown> steps);

}  // namespace disgen
