#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "disgen/rng.hpp"
#include "disgen/tensor.hpp"

namespace disgen {

/// Gradient of a scalar root with respect to each named leaf.
using Gradients = std::map<std::string, Tensor>;

struct AdamConfig;

/// One trainable tensor with its Adam moment buffers.
struct ParameterEntry {
    Tensor value;
    Tensor first_moment;
    Tensor second_moment;
};

/// Named trainable parameters. Paths are dot-separated ("enc1.weight").
class ParameterSet {
public:
    void add(const std::string& path, Tensor value);
    bool contains(const std::string& path) const { return entries_.count(path) != 0; }

    const Tensor& at(const std::string& path) const;
    Tensor& mutable_at(const std::string& path);

    const std::map<std::string, ParameterEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::uint64_t step_count() const noexcept { return steps_; }

    /// Merge another set's entries in; paths must not collide.
    void merge(const ParameterSet& other);

    void freeze() noexcept { frozen_ = true; }
    bool frozen() const noexcept { return frozen_; }

    /// Hash over every path and value bit pattern.
    std::uint64_t checksum() const;

    std::size_t scalar_count() const;

    friend void adam_step(ParameterSet&, const Gradients&, const AdamConfig&);

private:
    std::map<std::string, ParameterEntry> entries_;
    std::uint64_t steps_ = 0;
    bool frozen_ = false;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam update. Parameters absent from `grads` still advance
/// their moments with a zero gradient.
void adam_step(ParameterSet& params, const Gradients& grads, const AdamConfig& config);

/// Uniform in ±sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace disgen
