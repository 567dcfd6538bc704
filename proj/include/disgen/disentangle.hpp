#pragma once

#include <span>
#include <string>
#include <vector>

#include "disgen/backbone.hpp"
#include "disgen/batch.hpp"
#include "disgen/params.hpp"
#include "disgen/tape.hpp"

namespace disgen {

/// Widths of the two encoders and their heads. Both encoders read the same
/// pooled backbone output h_g (width d_g).
struct HeadConfig {
    std::size_t backbone_width = 64;  // d_g
    std::size_t hidden = 64;          // d_h
    std::size_t size_width = 16;      // d_s
    std::size_t num_classes = 2;      // C
};

/// enc1.* (task path), enc2.* (size path), task_head.*, size_head.*
ParameterSet init_heads(const HeadConfig& config, Rng& rng);

struct EncodedViews {
    Var h_task;       // H_t, rows in batch order
    Var h_size;       // H_s
    Var task_logits;  // t per graph
    Var size_repr;    // s per graph
};

/// h_t = relu(ENC₁ h_g), h_s = relu(ENC₂ h_g), t = task head(h_t), s = size head(h_s).
EncodedViews encode_views(Tape& tape, const ParameterSet& params, const HeadConfig& config, Var pooled);

/// Row indices of originals / size-invariant / task-invariant views in a
/// batch of b triples (rows 3i, 3i+1, 3i+2).
std::vector<std::size_t> view_rows(std::size_t triples, std::size_t view);

/// Mean over graphs of −log(exp(c₁/τ) / (exp(c₁/τ) + exp(c₂/τ))) with
/// c₁ = cos(s, s⁽¹⁾), c₂ = cos(s, s⁽²⁾). Inputs are b×d_s.
Var contrastive_loss(Var s_original, Var s_size_view, Var s_task_view, double tau);

/// α₁·CE(y, t) + α₂·CE(y, t⁽²⁾), each CE a batch mean.
Var supervision_loss(Var t_original, Var t_task_view, std::span<const std::size_t> labels, double alpha1,
                     double alpha2);

/// Closed-form projection and its residual. `p` is the ridge solution held
/// constant; `residual` D = sqrt(‖H_t P − H_s‖²_F + λ‖P‖²_F) stays
/// differentiable in H_t and H_s. With λ = 0 this is ‖H_t P − H_s‖_F.
struct Projection {
    Tensor p;
    Var residual;
};
Projection optimal_projection(Var h_task, Var h_size, double ridge);

/// 1 / (D² + ε).
Var decoupling_loss(Var residual, double epsilon);

struct LossWeights {
    double tau = 0.5;
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    double beta1 = 0.5;
    double beta2 = 1.0;
    double beta3 = 5e4;
    double ridge = 1e-6;
    double epsilon = 1e-8;
};

struct LossBreakdown {
    double size_loss = 0.0;        // L_s
    double task_loss = 0.0;        // L_t
    double decoupling_loss = 0.0;  // L_d
    double residual = 0.0;         // D
    double total = 0.0;
    double beta1 = 0.0, beta2 = 0.0, beta3 = 0.0;
    std::size_t zero_norm_size_rows = 0;  // s rows that hit the cosine norm floor
};

/// β₁L_s + β₂L_t + β₃L_d on the tape.
Var total_loss(Var size_loss, Var task_loss, Var decoupling, double beta1, double beta2, double beta3);

/// Plain-number form of the same weighted sum.
LossBreakdown total_loss(double size_loss, double task_loss, double decoupling, double beta1, double beta2,
                         double beta3);

struct Objective {
    Var total;
    LossBreakdown breakdown;
};

/// Full DisGen objective on a batch assembled from triples.
Objective disgen_objective(Tape& tape, const ParameterSet& params, const BackboneConfig& backbone,
                           const HeadConfig& heads, const GraphBatch& batch, const LossWeights& weights);

/// Task-head logits for standalone graphs (one row per graph).
Tensor task_logits(const ParameterSet& params, const BackboneConfig& backbone, const HeadConfig& heads,
                   std::span<const GraphRecord> graphs);

}  // namespace disgen
