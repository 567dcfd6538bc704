#include "disgen/tape.hpp"

#include <algorithm>
#include <cmath>

#include "disgen/error.hpp"

namespace disgen {

const Tensor& Var::value() const {
    if (!tape_) throw ContractError("value() on an unbound Var");
    return tape_->value(id_);
}

BlockDiagonal::BlockDiagonal(std::vector<Tensor> square_blocks) : blocks(std::move(square_blocks)) {
    offsets.reserve(blocks.size() + 1);
    offsets.push_back(0);
    for (const auto& b : blocks) {
        if (b.rows() != b.cols()) throw DimensionError("block_diagonal: non-square block " + shape_string(b));
        offsets.push_back(offsets.back() + b.rows());
    }
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{"constant", {}, std::move(value), nullptr, false, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(const std::string& name, Tensor value) {
    nodes_.push_back(Node{"leaf", {}, std::move(value), nullptr, true, name});
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const ParameterSet& params, const std::string& name) { return leaf(name, params.at(name)); }

Var Tape::record(const char* op, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward) {
    bool needs = false;
    for (std::size_t in : inputs) {
        if (in >= nodes_.size()) throw ContractError(std::string(op) + ": input node out of range");
        needs = needs || nodes_[in].requires_grad;
    }
    nodes_.push_back(Node{op, std::move(inputs), std::move(value), needs ? std::move(backward) : nullptr, needs, {}});
    return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var root) const {
    if (root.tape() != this) throw ContractError("backward: root belongs to a different tape");
    const Tensor& rv = nodes_[root.id()].value;
    if (!rv.is_scalar()) throw ContractError("backward: root must be scalar, got " + shape_string(rv));

    std::vector<Tensor> grads(root.id() + 1);
    for (std::size_t i = 0; i <= root.id(); ++i) {
        if (nodes_[i].requires_grad) grads[i] = Tensor(nodes_[i].value.rows(), nodes_[i].value.cols());
    }
    if (nodes_[root.id()].requires_grad) grads[root.id()][0] = 1.0;

    std::vector<Tensor*> input_grads;
    for (std::size_t i = root.id() + 1; i-- > 0;) {
        const Node& node = nodes_[i];
        if (!node.backward) continue;
        input_grads.clear();
        for (std::size_t in : node.inputs) input_grads.push_back(nodes_[in].requires_grad ? &grads[in] : nullptr);
        node.backward(*this, grads[i], input_grads);
    }

    Gradients out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& node = nodes_[i];
        if (node.leaf_name.empty()) continue;
        Tensor g = i <= root.id() ? grads[i] : Tensor(node.value.rows(), node.value.cols());
        auto [it, inserted] = out.emplace(node.leaf_name, g);
        if (!inserted) it->second += g;
    }
    return out;
}

Tensor softmax_rows(const Tensor& logits) {
    Tensor p(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        double mx = -INFINITY;
        for (std::size_t c = 0; c < logits.cols(); ++c) mx = std::max(mx, logits(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < logits.cols(); ++c) z += (p(r, c) = std::exp(logits(r, c) - mx));
        for (std::size_t c = 0; c < logits.cols(); ++c) p(r, c) /= z;
    }
    return p;
}

namespace ops {

namespace {

Tape& same_tape(const char* op, Var a) {
    if (!a.valid()) throw ContractError(std::string(op) + ": unbound input");
    return *a.tape();
}

Tape& same_tape(const char* op, Var a, Var b) {
    Tape& t = same_tape(op, a);
    if (b.tape() != &t) throw ContractError(std::string(op) + ": inputs live on different tapes");
    return t;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
    }
}

void axpy(Tensor& dst, double alpha, const Tensor& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha * src[i];
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape& t = same_tape("matmul", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.cols() != bv.rows()) {
        throw DimensionError("matmul: shape mismatch " + shape_string(av) + " x " + shape_string(bv));
    }
    const std::size_t ia = a.id(), ib = b.id();
    return t.record("matmul", {ia, ib}, disgen::matmul(av, bv),
                    [ia, ib](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        if (d[0]) *d[0] += disgen::matmul(g, disgen::transpose(tp.value(ib)));
                        if (d[1]) *d[1] += disgen::matmul(disgen::transpose(tp.value(ia)), g);
                    });
}

Var add(Var a, Var b) {
    Tape& t = same_tape("add", a, b);
    require_same_shape("add", a.value(), b.value());
    Tensor out = a.value();
    out += b.value();
    return t.record("add", {a.id(), b.id()}, std::move(out),
                    [](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (d[0]) *d[0] += g;
                        if (d[1]) *d[1] += g;
                    });
}

Var sub(Var a, Var b) {
    Tape& t = same_tape("sub", a, b);
    require_same_shape("sub", a.value(), b.value());
    return t.record("sub", {a.id(), b.id()}, disgen::subtract(a.value(), b.value()),
                    [](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (d[0]) *d[0] += g;
                        if (d[1]) axpy(*d[1], -1.0, g);
                    });
}

Var scale(Var a, double factor) {
    Tape& t = same_tape("scale", a);
    Tensor out = a.value();
    for (double& v : out.values()) v *= factor;
    return t.record("scale", {a.id()}, std::move(out),
                    [factor](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (d[0]) axpy(*d[0], factor, g);
                    });
}

Var scale_by(Var s, Var x) {
    Tape& t = same_tape("scale_by", s, x);
    if (!s.value().is_scalar()) throw DimensionError("scale_by: factor must be [1x1], got " + shape_string(s.value()));
    const double sv = s.value()[0];
    Tensor out = x.value();
    for (double& v : out.values()) v *= sv;
    const std::size_t is = s.id(), ix = x.id();
    return t.record("scale_by", {is, ix}, std::move(out),
                    [is, ix](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        const Tensor& xv = tp.value(ix);
                        if (d[0]) {
                            double acc = 0.0;
                            for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * xv[i];
                            (*d[0])[0] += acc;
                        }
                        if (d[1]) axpy(*d[1], tp.value(is)[0], g);
                    });
}

Var add_constant(Var a, double c) {
    Tape& t = same_tape("add_constant", a);
    Tensor out = a.value();
    for (double& v : out.values()) v += c;
    return t.record("add_constant", {a.id()}, std::move(out),
                    [](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (d[0]) *d[0] += g;
                    });
}

Var hadamard(Var a, Var b) {
    Tape& t = same_tape("hadamard", a, b);
    require_same_shape("hadamard", a.value(), b.value());
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    const std::size_t ia = a.id(), ib = b.id();
    return t.record("hadamard", {ia, ib}, std::move(out),
                    [ia, ib](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        const Tensor& av = tp.value(ia);
                        const Tensor& bv = tp.value(ib);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                            if (d[0]) (*d[0])[i] += g[i] * bv[i];
                            if (d[1]) (*d[1])[i] += g[i] * av[i];
                        }
                    });
}

Var relu(Var a) {
    Tape& t = same_tape("relu", a);
    Tensor out = a.value();
    for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
    const std::size_t ia = a.id();
    return t.record("relu", {ia}, std::move(out),
                    [ia](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        const Tensor& av = tp.value(ia);
                        for (std::size_t i = 0; i < g.size(); ++i)
                            if (av[i] > 0.0) (*d[0])[i] += g[i];
                    });
}

Var log(Var a) {
    Tape& t = same_tape("log", a);
    Tensor out = a.value();
    for (double& v : out.values()) {
        if (!(v > 0.0)) throw DomainError("log: non-positive input " + std::to_string(v));
        v = std::log(v);
    }
    const std::size_t ia = a.id();
    return t.record("log", {ia}, std::move(out),
                    [ia](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        const Tensor& av = tp.value(ia);
                        for (std::size_t i = 0; i < g.size(); ++i) (*d[0])[i] += g[i] / av[i];
                    });
}

Var exp(Var a) {
    Tape& t = same_tape("exp", a);
    Tensor out = a.value();
    for (double& v : out.values()) v = std::exp(v);
    const std::size_t ia = a.id();
    return t.record("exp", {ia}, std::move(out),
                    [ia](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        const Tensor& av = tp.value(ia);
                        for (std::size_t i = 0; i < g.size(); ++i) (*d[0])[i] += g[i] * std::exp(av[i]);
                    });
}

Var reciprocal(Var a) {
    Tape& t = same_tape("reciprocal", a);
    Tensor out = a.value();
    for (double& v : out.values()) {
        if (v == 0.0) throw DomainError("reciprocal: zero input");
        v = 1.0 / v;
    }
    const std::size_t ia = a.id();
    return t.record("reciprocal", {ia}, std::move(out),
                    [ia](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        const Tensor& av = tp.value(ia);
                        for (std::size_t i = 0; i < g.size(); ++i) (*d[0])[i] -= g[i] / (av[i] * av[i]);
                    });
}

Var transpose(Var a) {
    Tape& t = same_tape("transpose", a);
    return t.record("transpose", {a.id()}, disgen::transpose(a.value()),
                    [](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (d[0]) *d[0] += disgen::transpose(g);
                    });
}

Var sum(Var a) {
    Tape& t = same_tape("sum", a);
    double s = 0.0;
    for (double v : a.value().values()) s += v;
    return t.record("sum", {a.id()}, Tensor::scalar(s),
                    [](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        for (double& v : d[0]->values()) v += g[0];
                    });
}

Var row_mean(Var a) {
    Tape& t = same_tape("row_mean", a);
    const Tensor& av = a.value();
    if (av.rows() == 0) throw ContractError("row_mean: zero rows");
    const std::size_t n = av.rows(), m = av.cols();
    Tensor out(1, m);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) out(0, c) += av(r, c);
    for (double& v : out.values()) v /= static_cast<double>(n);
    return t.record("row_mean", {a.id()}, std::move(out),
                    [n, m](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        const double inv = 1.0 / static_cast<double>(n);
                        for (std::size_t r = 0; r < n; ++r)
                            for (std::size_t c = 0; c < m; ++c) (*d[0])(r, c) += g(0, c) * inv;
                    });
}

Var segment_mean(Var a, std::span<const std::size_t> offsets) {
    Tape& t = same_tape("segment_mean", a);
    const Tensor& av = a.value();
    if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != av.rows()) {
        throw ContractError("segment_mean: offsets must span all " + std::to_string(av.rows()) + " rows");
    }
    const std::size_t segments = offsets.size() - 1, m = av.cols();
    Tensor out(segments, m);
    for (std::size_t s = 0; s < segments; ++s) {
        if (offsets[s + 1] <= offsets[s]) {
            throw ContractError("segment_mean: segment " + std::to_string(s) + " has no rows");
        }
        for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r)
            for (std::size_t c = 0; c < m; ++c) out(s, c) += av(r, c);
        const double inv = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
        for (std::size_t c = 0; c < m; ++c) out(s, c) *= inv;
    }
    std::vector<std::size_t> offs(offsets.begin(), offsets.end());
    return t.record("segment_mean", {a.id()}, std::move(out),
                    [offs = std::move(offs), m](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        for (std::size_t s = 0; s + 1 < offs.size(); ++s) {
                            const double inv = 1.0 / static_cast<double>(offs[s + 1] - offs[s]);
                            for (std::size_t r = offs[s]; r < offs[s + 1]; ++r)
                                for (std::size_t c = 0; c < m; ++c) (*d[0])(r, c) += g(s, c) * inv;
                        }
                    });
}

namespace {

struct CosineParts {
    double dot, norm_a, norm_b, na, nb, cos;
};

CosineParts cosine_parts(const double* a, const double* b, std::size_t n, double floor) {
    CosineParts p{0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        p.dot += a[i] * b[i];
        p.norm_a += a[i] * a[i];
        p.norm_b += b[i] * b[i];
    }
    p.norm_a = std::sqrt(p.norm_a);
    p.norm_b = std::sqrt(p.norm_b);
    p.na = std::max(p.norm_a, floor);
    p.nb = std::max(p.norm_b, floor);
    p.cos = p.dot / (p.na * p.nb);
    return p;
}

// d cos / d a and d cos / d b scaled by g, for one pair of vectors.
void cosine_backward(const double* a, const double* b, std::size_t n, double floor, double g, double* da,
                     double* db) {
    const CosineParts p = cosine_parts(a, b, n, floor);
    const bool a_free = p.norm_a > floor;
    const bool b_free = p.norm_b > floor;
    for (std::size_t i = 0; i < n; ++i) {
        if (da) {
            double v = b[i] / (p.na * p.nb);
            if (a_free) v -= p.cos * a[i] / (p.na * p.na);
            da[i] += g * v;
        }
        if (db) {
            double v = a[i] / (p.na * p.nb);
            if (b_free) v -= p.cos * b[i] / (p.nb * p.nb);
            db[i] += g * v;
        }
    }
}

double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

}  // namespace

Var cosine_similarity(Var a, Var b, double norm_floor) {
    Tape& t = same_tape("cosine_similarity", a, b);
    require_same_shape("cosine_similarity", a.value(), b.value());
    if (a.value().rows() != 1 && a.value().cols() != 1) {
        throw DimensionError("cosine_similarity: expected vectors, got " + shape_string(a.value()));
    }
    const std::size_t n = a.value().size();
    const double c = clamp_unit(cosine_parts(a.value().data(), b.value().data(), n, norm_floor).cos);
    const std::size_t ia = a.id(), ib = b.id();
    return t.record("cosine_similarity", {ia, ib}, Tensor::scalar(c),
                    [ia, ib, n, norm_floor](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        cosine_backward(tp.value(ia).data(), tp.value(ib).data(), n, norm_floor, g[0],
                                        d[0] ? d[0]->data() : nullptr, d[1] ? d[1]->data() : nullptr);
                    });
}

Var rowwise_cosine(Var a, Var b, double norm_floor) {
    Tape& t = same_tape("rowwise_cosine", a, b);
    require_same_shape("rowwise_cosine", a.value(), b.value());
    const std::size_t rows = a.value().rows(), m = a.value().cols();
    Tensor out(rows, 1);
    for (std::size_t r = 0; r < rows; ++r) {
        out(r, 0) = clamp_unit(cosine_parts(a.value().data() + r * m, b.value().data() + r * m, m, norm_floor).cos);
    }
    const std::size_t ia = a.id(), ib = b.id();
    return t.record("rowwise_cosine", {ia, ib}, std::move(out),
                    [ia, ib, rows, m, norm_floor](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        for (std::size_t r = 0; r < rows; ++r) {
                            cosine_backward(tp.value(ia).data() + r * m, tp.value(ib).data() + r * m, m, norm_floor,
                                            g(r, 0), d[0] ? d[0]->data() + r * m : nullptr,
                                            d[1] ? d[1]->data() + r * m : nullptr);
                        }
                    });
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels) {
    Tape& t = same_tape("softmax_cross_entropy", logits);
    const Tensor& lv = logits.value();
    if (labels.size() != lv.rows()) {
        throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                             shape_string(lv));
    }
    if (lv.rows() == 0) throw ContractError("softmax_cross_entropy: empty batch");
    for (std::size_t y : labels) {
        if (y >= lv.cols()) {
            throw ContractError("softmax_cross_entropy: label " + std::to_string(y) + " >= class count " +
                                std::to_string(lv.cols()));
        }
    }
    Tensor probs = softmax_rows(lv);
    double loss = 0.0;
    for (std::size_t r = 0; r < lv.rows(); ++r) {
        // log-sum-exp form keeps the loss finite when the target probability underflows
        double mx = -INFINITY;
        for (std::size_t c = 0; c < lv.cols(); ++c) mx = std::max(mx, lv(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < lv.cols(); ++c) z += std::exp(lv(r, c) - mx);
        loss += mx + std::log(z) - lv(r, labels[r]);
    }
    const double n = static_cast<double>(lv.rows());
    std::vector<std::size_t> ys(labels.begin(), labels.end());
    return t.record("softmax_cross_entropy", {logits.id()}, Tensor::scalar(loss / n),
                    [probs = std::move(probs), ys = std::move(ys), n](const Tape&, const Tensor& g,
                                                                      std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        for (std::size_t r = 0; r < probs.rows(); ++r)
                            for (std::size_t c = 0; c < probs.cols(); ++c) {
                                const double target = c == ys[r] ? 1.0 : 0.0;
                                (*d[0])(r, c) += g[0] * (probs(r, c) - target) / n;
                            }
                    });
}

Var frobenius_norm(Var a) {
    Tape& t = same_tape("frobenius_norm", a);
    const double nrm = disgen::frobenius_norm(a.value());
    const std::size_t ia = a.id();
    return t.record("frobenius_norm", {ia}, Tensor::scalar(nrm),
                    [ia, nrm](const Tape& tp, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0] || nrm == 0.0) return;  // subgradient 0 at the origin
                        axpy(*d[0], g[0] / nrm, tp.value(ia));
                    });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
    Tape& t = same_tape("gather_rows", a);
    const Tensor& av = a.value();
    const std::size_t m = av.cols();
    Tensor out(rows.size(), m);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= av.rows()) {
            throw DimensionError("gather_rows: row " + std::to_string(rows[i]) + " out of range for " +
                                 shape_string(av));
        }
        std::copy_n(av.data() + rows[i] * m, m, out.data() + i * m);
    }
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    return t.record("gather_rows", {a.id()}, std::move(out),
                    [idx = std::move(idx), m](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        for (std::size_t i = 0; i < idx.size(); ++i)
                            for (std::size_t c = 0; c < m; ++c) (*d[0])(idx[i], c) += g(i, c);
                    });
}

Var concat_cols(Var a, Var b) {
    Tape& t = same_tape("concat_cols", a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rows() != bv.rows()) {
        throw DimensionError("concat_cols: row mismatch " + shape_string(av) + " vs " + shape_string(bv));
    }
    const std::size_t p = av.cols(), q = bv.cols();
    Tensor out(av.rows(), p + q);
    for (std::size_t r = 0; r < av.rows(); ++r) {
        for (std::size_t c = 0; c < p; ++c) out(r, c) = av(r, c);
        for (std::size_t c = 0; c < q; ++c) out(r, p + c) = bv(r, c);
    }
    return t.record("concat_cols", {a.id(), b.id()}, std::move(out),
                    [p, q](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        for (std::size_t r = 0; r < g.rows(); ++r) {
                            if (d[0])
                                for (std::size_t c = 0; c < p; ++c) (*d[0])(r, c) += g(r, c);
                            if (d[1])
                                for (std::size_t c = 0; c < q; ++c) (*d[1])(r, c) += g(r, p + c);
                        }
                    });
}

Var block_matmul(std::shared_ptr<const BlockDiagonal> blocks, Var x) {
    Tape& t = same_tape("block_matmul", x);
    const Tensor& xv = x.value();
    if (!blocks || blocks->total() != xv.rows()) {
        throw DimensionError("block_matmul: block total " + std::to_string(blocks ? blocks->total() : 0) +
                             " vs input " + shape_string(xv));
    }
    const std::size_t m = xv.cols();
    Tensor out(xv.rows(), m);
    for (std::size_t b = 0; b < blocks->blocks.size(); ++b) {
        const Tensor& blk = blocks->blocks[b];
        const std::size_t off = blocks->offsets[b], n = blk.rows();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const double w = blk(i, k);
                if (w == 0.0) continue;
                const double* src = xv.data() + (off + k) * m;
                double* dst = out.data() + (off + i) * m;
                for (std::size_t c = 0; c < m; ++c) dst[c] += w * src[c];
            }
    }
    return t.record("block_matmul", {x.id()}, std::move(out),
                    [blocks, m](const Tape&, const Tensor& g, std::span<Tensor* const> d) {
                        if (!d[0]) return;
                        for (std::size_t b = 0; b < blocks->blocks.size(); ++b) {
                            const Tensor& blk = blocks->blocks[b];
                            const std::size_t off = blocks->offsets[b], n = blk.rows();
                            for (std::size_t i = 0; i < n; ++i)
                                for (std::size_t k = 0; k < n; ++k) {
                                    const double w = blk(i, k);
                                    if (w == 0.0) continue;
                                    const double* src = g.data() + (off + i) * m;
                                    double* dst = d[0]->data() + (off + k) * m;
                                    for (std::size_t c = 0; c < m; ++c) dst[c] += w * src[c];
                                }
                        }
                    });
}

}  // namespace ops
}  // namespace disgen
