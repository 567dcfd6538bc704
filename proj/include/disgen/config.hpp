#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "disgen/backbone.hpp"
#include "disgen/split.hpp"

namespace disgen {

/// Every hyperparameter of a run. Parsed from flat `key = value` text;
/// lists are comma-separated. Unknown keys are rejected.
struct RunConfig {
    // backbone and heads
    BackboneKind backbone = BackboneKind::GCN;
    std::size_t layers = 3;
    std::size_t hidden = 64;       // d_g
    std::size_t enc_hidden = 64;   // d_h
    std::size_t size_width = 16;   // d_s

    // objective
    double tau = 0.5;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double beta1 = 0.5;
    double beta2 = 1.0;
    double beta3 = 5e4;
    double ridge = 1e-6;
    double epsilon = 1e-8;

    // augmentation
    double k1_fraction = 0.2;
    double k2_fraction = 0.2;

    // optimisation
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 500;
    std::size_t patience = 50;
    bool warm_start = false;

    // explainer model
    BackboneKind explainer_backbone = BackboneKind::GCN;
    std::size_t pretrain_epochs = 300;
    std::size_t pretrain_patience = 50;

    // data
    std::uint64_t seed = 0;
    std::string dataset_path;
    std::string dataset_name;
    SplitRatios split{};
    std::vector<std::pair<std::size_t, std::size_t>> upsample;  // (class, ratio)

    // synthetic size-shift benchmark
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::size_t synth_per_class = 120;

    bool operator==(const RunConfig&) const = default;
};

/// Parses config text. Throws ConfigError naming the line on unknown keys,
/// duplicate keys, malformed values or out-of-range values.
RunConfig parse_run_config(const std::string& text);

/// Reads and parses a config file. A missing file is a ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical `key = value` text; parse_run_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& config);

/// JSON object with every field, in declaration order.
std::string to_config_json(const RunConfig& config);

/// Hash of the canonical text with `seed` excluded, so runs differing only
/// in seed share a hash.
std::uint64_t config_hash(const RunConfig& config);

/// Range checks shared by the parser and programmatic callers.
void validate(const RunConfig& config);

}  // namespace disgen
