#include "disgen/disentangle.hpp"

#include <cmath>

#include "disgen/error.hpp"
#include "disgen/linalg.hpp"

namespace disgen {

ParameterSet init_heads(const HeadConfig& config, Rng& rng) {
    if (config.hidden < 1 || config.size_width < 1 || config.backbone_width < 1 || config.num_classes < 1) {
        throw ContractError("heads: every width must be >= 1");
    }
    ParameterSet params;
    params.add("enc1.weight", glorot_uniform(config.backbone_width, config.hidden, rng));
    params.add("enc1.bias", Tensor(1, config.hidden));
    params.add("enc2.weight", glorot_uniform(config.backbone_width, config.hidden, rng));
    params.add("enc2.bias", Tensor(1, config.hidden));
    params.add("task_head.weight", glorot_uniform(config.hidden, config.num_classes, rng));
    params.add("task_head.bias", Tensor(1, config.num_classes));
    params.add("size_head.weight", glorot_uniform(config.hidden, config.size_width, rng));
    params.add("size_head.bias", Tensor(1, config.size_width));
    return params;
}

namespace {

Var linear(Tape& tape, const ParameterSet& params, const std::string& name, Var x) {
    return add_bias(ops::matmul(x, tape.parameter(params, name + ".weight")), tape.parameter(params, name + ".bias"));
}

std::size_t count_zero_rows(const Tensor& t, double floor) {
    std::size_t zero = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < t.cols(); ++j) sq += t(i, j) * t(i, j);
        if (std::sqrt(sq) < floor) ++zero;
    }
    return zero;
}

}  // namespace

EncodedViews encode_views(Tape& tape, const ParameterSet& params, const HeadConfig& config, Var pooled) {
    if (pooled.value().cols() != config.backbone_width) {
        throw DimensionError("encode_views: backbone output width " + std::to_string(pooled.value().cols()) +
                             ", encoders expect " + std::to_string(config.backbone_width));
    }
    EncodedViews out;
    out.h_task = ops::relu(linear(tape, params, "enc1", pooled));
    out.h_size = ops::relu(linear(tape, params, "enc2", pooled));
    out.task_logits = linear(tape, params, "task_head", out.h_task);
    out.size_repr = linear(tape, params, "size_head", out.h_size);
    return out;
}

std::vector<std::size_t> view_rows(std::size_t triples, std::size_t view) {
    std::vector<std::size_t> rows(triples);
    for (std::size_t i = 0; i < triples; ++i) rows[i] = 3 * i + view;
    return rows;
}

Var contrastive_loss(Var s_original, Var s_size_view, Var s_task_view, double tau) {
    if (!(tau > 0.0)) throw ContractError("contrastive_loss: tau must be positive");
    Var c1 = ops::rowwise_cosine(s_original, s_size_view);
    Var c2 = ops::rowwise_cosine(s_original, s_task_view);
    // −log softmax([c₁/τ, c₂/τ])₀ is exactly the per-graph term.
    Var logits = ops::scale(ops::concat_cols(c1, c2), 1.0 / tau);
    const std::vector<std::size_t> positive(s_original.value().rows(), 0);
    return ops::softmax_cross_entropy(logits, positive);
}

Var supervision_loss(Var t_original, Var t_task_view, std::span<const std::size_t> labels, double alpha1,
                     double alpha2) {
    return ops::add(ops::scale(ops::softmax_cross_entropy(t_original, labels), alpha1),
                    ops::scale(ops::softmax_cross_entropy(t_task_view, labels), alpha2));
}

Projection optimal_projection(Var h_task, Var h_size, double ridge) {
    Tape& tape = *h_task.tape();
    Projection out;
    out.p = least_squares_solve(h_task.value(), h_size.value(), ridge);
    Var fit = ops::sub(ops::matmul(h_task, tape.constant(out.p)), h_size);
    if (ridge == 0.0) {
        out.residual = ops::frobenius_norm(fit);
        return out;
    }
    // sqrt(‖H_t P − H_s‖² + λ‖P‖²): the λ‖P‖² term rides along as one extra
    // constant column so that P stays the exact minimiser of what D measures.
    Tensor penalty(fit.value().rows(), 1);
    penalty(0, 0) = std::sqrt(ridge) * frobenius_norm(out.p);
    out.residual = ops::frobenius_norm(ops::concat_cols(fit, tape.constant(std::move(penalty))));
    return out;
}

Var decoupling_loss(Var residual, double epsilon) {
    if (!(epsilon > 0.0)) throw ContractError("decoupling_loss: epsilon must be positive");
    return ops::reciprocal(ops::add_constant(ops::hadamard(residual, residual), epsilon));
}

Var total_loss(Var size_loss, Var task_loss, Var decoupling, double beta1, double beta2, double beta3) {
    return ops::add(ops::add(ops::scale(size_loss, beta1), ops::scale(task_loss, beta2)),
                    ops::scale(decoupling, beta3));
}

LossBreakdown total_loss(double size_loss, double task_loss, double decoupling, double beta1, double beta2,
                         double beta3) {
    LossBreakdown out;
    out.size_loss = size_loss;
    out.task_loss = task_loss;
    out.decoupling_loss = decoupling;
    out.beta1 = beta1;
    out.beta2 = beta2;
    out.beta3 = beta3;
    out.total = (size_loss * beta1 + task_loss * beta2) + decoupling * beta3;
    return out;
}

Objective disgen_objective(Tape& tape, const ParameterSet& params, const BackboneConfig& backbone,
                           const HeadConfig& heads, const GraphBatch& batch, const LossWeights& weights) {
    if (batch.graph_count() == 0 || batch.graph_count() % 3 != 0) {
        throw ContractError("disgen_objective: batch must hold whole triples, got " +
                            std::to_string(batch.graph_count()) + " graphs");
    }
    const std::size_t b = batch.graph_count() / 3;
    Var pooled = mean_pool(backbone_nodes(tape, params, backbone, batch), batch);
    const EncodedViews enc = encode_views(tape, params, heads, pooled);

    const auto rows0 = view_rows(b, 0), rows1 = view_rows(b, 1), rows2 = view_rows(b, 2);
    std::vector<std::size_t> labels(b);
    for (std::size_t i = 0; i < b; ++i) labels[i] = batch.graphs[3 * i].label;

    Var ls = contrastive_loss(ops::gather_rows(enc.size_repr, rows0), ops::gather_rows(enc.size_repr, rows1),
                              ops::gather_rows(enc.size_repr, rows2), weights.tau);
    Var lt = supervision_loss(ops::gather_rows(enc.task_logits, rows0), ops::gather_rows(enc.task_logits, rows2),
                              labels, weights.alpha1, weights.alpha2);
    const Projection proj = optimal_projection(enc.h_task, enc.h_size, weights.ridge);
    Var ld = decoupling_loss(proj.residual, weights.epsilon);

    Objective out;
    out.total = total_loss(ls, lt, ld, weights.beta1, weights.beta2, weights.beta3);
    out.breakdown = total_loss(ls.value().item(), lt.value().item(), ld.value().item(), weights.beta1, weights.beta2,
                               weights.beta3);
    out.breakdown.residual = proj.residual.value().item();
    out.breakdown.total = out.total.value().item();
    out.breakdown.zero_norm_size_rows = count_zero_rows(enc.size_repr.value(), 1e-12);
    return out;
}

Tensor task_logits(const ParameterSet& params, const BackboneConfig& backbone, const HeadConfig& heads,
                   std::span<const GraphRecord> graphs) {
    constexpr std::size_t kChunk = 256;
    Tensor out(graphs.size(), heads.num_classes);
    for (std::size_t start = 0; start < graphs.size(); start += kChunk) {
        const std::size_t end = std::min(graphs.size(), start + kChunk);
        GraphBatch batch = assemble_graphs(std::vector<GraphRecord>(graphs.begin() + start, graphs.begin() + end));
        Tape tape;
        Var pooled = mean_pool(backbone_nodes(tape, params, backbone, batch), batch);
        const Tensor& logits = encode_views(tape, params, heads, pooled).task_logits.value();
        for (std::size_t i = 0; i < logits.rows(); ++i)
            for (std::size_t c = 0; c < logits.cols(); ++c) out(start + i, c) = logits(i, c);
    }
    return out;
}

}  // namespace disgen
