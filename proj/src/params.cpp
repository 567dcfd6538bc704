#include "disgen/params.hpp"

#include <cmath>
#include <cstring>

#include "disgen/error.hpp"

namespace disgen {

void ParameterSet::add(const std::string& path, Tensor value) {
    if (frozen_) throw ContractError("parameter set is frozen; cannot add '" + path + "'");
    if (entries_.count(path) != 0) throw ContractError("duplicate parameter path '" + path + "'");
    Tensor zeros(value.rows(), value.cols());
    entries_.emplace(path, ParameterEntry{std::move(value), zeros, zeros});
}

const Tensor& ParameterSet::at(const std::string& path) const {
    auto it = entries_.find(path);
    if (it == entries_.end()) throw ContractError("unknown parameter '" + path + "'");
    return it->second.value;
}

Tensor& ParameterSet::mutable_at(const std::string& path) {
    if (frozen_) throw ContractError("parameter set is frozen; cannot mutate '" + path + "'");
    auto it = entries_.find(path);
    if (it == entries_.end()) throw ContractError("unknown parameter '" + path + "'");
    return it->second.value;
}

void ParameterSet::merge(const ParameterSet& other) {
    for (const auto& [path, entry] : other.entries_) add(path, entry.value);
}

std::uint64_t ParameterSet::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [path, entry] : entries_) {
        h = fnv1a(path.data(), path.size(), h);
        h = fnv1a(entry.value.data(), entry.value.size() * sizeof(double), h);
    }
    return h;
}

std::size_t ParameterSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& [path, entry] : entries_) n += entry.value.size();
    return n;
}

void adam_step(ParameterSet& params, const Gradients& grads, const AdamConfig& config) {
    if (params.frozen_) throw ContractError("adam_step on a frozen parameter set");
    ++params.steps_;
    const double t = static_cast<double>(params.steps_);
    const double bias1 = 1.0 - std::pow(config.beta1, t);
    const double bias2 = 1.0 - std::pow(config.beta2, t);
    for (auto& [path, entry] : params.entries_) {
        auto git = grads.find(path);
        const Tensor* g = git == grads.end() ? nullptr : &git->second;
        if (g && g->shape() != entry.value.shape()) {
            throw DimensionError("adam_step: gradient for '" + path + "' has shape " + shape_string(*g) +
                                 ", parameter " + shape_string(entry.value));
        }
        for (std::size_t i = 0; i < entry.value.size(); ++i) {
            const double gi = g ? (*g)[i] : 0.0;
            double& m = entry.first_moment[i];
            double& v = entry.second_moment[i];
            m = config.beta1 * m + (1.0 - config.beta1) * gi;
            v = config.beta2 * v + (1.0 - config.beta2) * gi * gi;
            const double mhat = m / bias1;
            const double vhat = v / bias2;
            entry.value[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
    }
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w(fan_in, fan_out);
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    return w;
}

}  // namespace disgen
