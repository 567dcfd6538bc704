#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "disgen/augmentor.hpp"
#include "disgen/config.hpp"
#include "disgen/split.hpp"
#include "disgen/synth.hpp"
#include "disgen/trainer.hpp"

namespace disgen {

/// Everything upstream of joint training: split members, the frozen
/// explainer model and one view triple per (upsampled) training graph.
struct PreparedRun {
    std::size_t num_classes = 0;
    std::vector<GraphRecord> train;  // after upsampling
    std::vector<GraphRecord> validation;
    std::vector<GraphRecord> small_test;
    std::vector<GraphRecord> large_test;
    PretrainedModel explainer_model;
    std::vector<ViewTriple> triples;
};

std::vector<GraphRecord> gather(std::span<const GraphRecord> graphs, std::span<const std::int64_t> ids);

/// Applies config.upsample to the split's train ids (in order, each with
/// its own seed offset).
std::vector<std::int64_t> upsampled_train_ids(std::span<const GraphRecord> graphs, const DatasetSplit& split,
                                              const RunConfig& config, std::vector<std::string>* warnings = nullptr);

PretrainOptions pretrain_options(const RunConfig& config);

/// Upsampling, explainer pre-training, occlusion explanation, augmentation.
PreparedRun prepare_run(std::span<const GraphRecord> graphs, const DatasetSplit& split, std::size_t num_classes,
                        const RunConfig& config);

/// Trains with `config` on the prepared triples and fills both test F₁ scores.
TrainOutcome fit_and_evaluate(const PreparedRun& run, const RunConfig& config);

/// `config` with β₁ = β₃ = 0 and everything else unchanged.
RunConfig baseline_of(const RunConfig& config);

struct SizeShiftComparison {
    std::uint64_t seed = 0;
    double baseline_small_f1 = 0.0;
    double baseline_large_f1 = 0.0;
    double disgen_small_f1 = 0.0;
    double disgen_large_f1 = 0.0;
    MetricsReport baseline;
    MetricsReport disgen;
};

/// Generates the size-shift dataset for `seed`, splits it, prepares one set of
/// views and trains both the baseline and the full objective on them.
SizeShiftComparison run_size_shift_comparison(const RunConfig& config, const SizeShiftOptions& options,
                                              std::uint64_t seed);

}  // namespace disgen
