#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "disgen/params.hpp"
#include "disgen/tensor.hpp"

namespace disgen {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    std::size_t id() const noexcept { return id_; }
    Tape* tape() const noexcept { return tape_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Dense blocks laid out along the diagonal of a larger constant matrix.
/// Used for per-graph propagation over a batched node matrix.
struct BlockDiagonal {
    std::vector<Tensor> blocks;  // each square n_g × n_g
    std::vector<std::size_t> offsets;  // prefix sums of block sizes, length blocks+1

    explicit BlockDiagonal(std::vector<Tensor> square_blocks);
    std::size_t total() const noexcept { return offsets.back(); }
};

/// Define-by-run reverse-mode tape. Nodes are appended in evaluation order,
/// so every node's inputs precede it.
class Tape {
public:
    /// Receives the upstream gradient and one accumulator per input
    /// (nullptr when that input needs no gradient).
    using BackwardFn = std::function<void(const Tape&, const Tensor& upstream, std::span<Tensor* const> input_grads)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Differentiable leaf reported under `name` by backward().
    Var leaf(const std::string& name, Tensor value);
    /// Leaf initialised from a named parameter.
    Var parameter(const ParameterSet& params, const std::string& name);

    /// Append a computed node. Used by the primitives in `ops`.
    Var record(const char* op, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward);

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    const char* op_name(std::size_t id) const { return nodes_[id].op; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Reverse accumulation from a scalar root. Every named leaf appears in the
    /// result; leaves the root does not reach get exact zeros.
    Gradients backward(Var root) const;

private:
    struct Node {
        const char* op;
        std::vector<std::size_t> inputs;
        Tensor value;
        BackwardFn backward;
        bool requires_grad;
        std::string leaf_name;
    };

    std::vector<Node> nodes_;
};

/// Differentiable primitives. Shapes are never broadcast except for the
/// scalar cases that say so.
namespace ops {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
/// `s` must be 1×1; returns s·x.
Var scale_by(Var s, Var x);
Var add_constant(Var a, double c);
Var hadamard(Var a, Var b);
Var relu(Var a);
Var log(Var a);
Var exp(Var a);
Var reciprocal(Var a);
Var transpose(Var a);
/// Sum of all entries (1×1).
Var sum(Var a);
/// Mean over rows: n×d → 1×d.
Var row_mean(Var a);
/// Mean over consecutive row segments; offsets are prefix sums (length G+1).
Var segment_mean(Var a, std::span<const std::size_t> offsets);
/// Cosine similarity of two equal-shape vectors → 1×1.
Var cosine_similarity(Var a, Var b, double norm_floor = 1e-12);
/// Row-by-row cosine similarity of two n×d matrices → n×1.
Var rowwise_cosine(Var a, Var b, double norm_floor = 1e-12);
/// Mean softmax cross-entropy of logits rows against class indices → 1×1.
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels);
Var frobenius_norm(Var a);
Var gather_rows(Var a, std::span<const std::size_t> rows);
Var concat_cols(Var a, Var b);
/// Constant block-diagonal matrix times x.
Var block_matmul(std::shared_ptr<const BlockDiagonal> blocks, Var x);

}  // namespace ops

/// Row-wise softmax (stable); plain tensor helper.
Tensor softmax_rows(const Tensor& logits);

}  // namespace disgen
