#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "disgen/error.hpp"
#include "disgen/gradcheck.hpp"
#include "disgen/linalg.hpp"
#include "disgen/params.hpp"
#include "disgen/tape.hpp"
#include "test_support.hpp"

using namespace disgen;
using disgen::testing::numeric_gradient;
using disgen::testing::random_tensor;
using disgen::testing::relative_error;

namespace {

/// Closes over a unary primitive applied to leaf "x"; the scalar root is
/// Σ W ⊙ f(x) for a fixed random W so every output entry matters.
using Unary = std::function<Var(Tape&, Var)>;

double weighted_sum(const Tensor& y, const Tensor& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
    return s;
}

void expect_primitive_gradient(const char* name, const Unary& f, const std::function<Tensor(Rng&)>& sample) {
    Rng rng(std::hash<std::string>{}(name));
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Tensor x = sample(rng);
        Tensor w;
        auto forward = [&](const Tensor& input) {
            Tape tape;
            const Var y = f(tape, tape.constant(input));
            if (w.size() == 0) w = random_tensor(y.value().rows(), y.value().cols(), rng);
            return weighted_sum(y.value(), w);
        };
        forward(x);
        Tape tape;
        const Var xv = tape.leaf("x", x);
        const Var y = f(tape, xv);
        const Var root = ops::sum(ops::hadamard(y, tape.constant(w)));
        const Tensor analytic = tape.backward(root).at("x");
        const Tensor numeric = numeric_gradient(forward, x);
        for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, relative_error(analytic[i], numeric[i]));
    }
    EXPECT_LT(worst, 1e-4) << name;
}

Tensor away_from_zero(std::size_t r, std::size_t c, Rng& rng) {
    Tensor t = random_tensor(r, c, rng);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = (t[i] >= 0 ? 0.2 : -0.2) + t[i];
    return t;
}

}  // namespace

TEST(Tensor, MatmulByIdentityIsExact) {
    Rng rng(1);
    const Tensor z = random_tensor(3, 5, rng);
    EXPECT_EQ(matmul(Tensor::identity(3), z), z);
}

TEST(Tensor, ShapeMismatchThrows) {
    EXPECT_THROW(matmul(Tensor(2, 3), Tensor(2, 3)), DimensionError);
    EXPECT_THROW(subtract(Tensor(2, 3), Tensor(3, 2)), DimensionError);
    Tape tape;
    EXPECT_THROW(ops::add(tape.constant(Tensor(1, 2)), tape.constant(Tensor(2, 1))), DimensionError);
}

TEST(Primitives, CosineOfSelfIsOne) {
    Rng rng(2);
    Tape tape;
    const Tensor v = random_tensor(1, 6, rng);
    EXPECT_NEAR(ops::cosine_similarity(tape.constant(v), tape.constant(v)).value().item(), 1.0, 1e-15);
}

TEST(Primitives, CosineOfOrthogonalIsZero) {
    Tape tape;
    const Var a = tape.constant(Tensor::from_rows({{1, 0}}));
    const Var b = tape.constant(Tensor::from_rows({{0, 1}}));
    EXPECT_EQ(ops::cosine_similarity(a, b).value().item(), 0.0);
}

TEST(Primitives, GradientsMatchCentralDifferences) {
    auto mat = [](std::size_t r, std::size_t c) { return [r, c](Rng& rng) { return random_tensor(r, c, rng); }; };
    Rng fixed(99);
    const Tensor right = random_tensor(4, 2, fixed);
    const Tensor other = random_tensor(3, 4, fixed);
    const std::vector<std::size_t> offsets{0, 1, 3};
    const std::vector<std::size_t> labels{1, 0, 2};
    const std::vector<std::size_t> rows{2, 0, 2};
    auto blocks = std::make_shared<BlockDiagonal>(
        std::vector<Tensor>{random_tensor(1, 1, fixed), random_tensor(2, 2, fixed)});

    expect_primitive_gradient("matmul-left", [&](Tape& t, Var x) { return ops::matmul(x, t.constant(right)); }, mat(3, 4));
    expect_primitive_gradient("matmul-right", [&](Tape& t, Var x) { return ops::matmul(t.constant(other), x); }, mat(4, 2));
    expect_primitive_gradient("add", [&](Tape& t, Var x) { return ops::add(x, t.constant(other)); }, mat(3, 4));
    expect_primitive_gradient("sub", [&](Tape& t, Var x) { return ops::sub(t.constant(other), x); }, mat(3, 4));
    expect_primitive_gradient("scale", [](Tape&, Var x) { return ops::scale(x, -2.5); }, mat(3, 4));
    expect_primitive_gradient("scale_by-scalar", [&](Tape& t, Var x) { return ops::scale_by(x, t.constant(other)); }, mat(1, 1));
    expect_primitive_gradient("scale_by-tensor", [](Tape& t, Var x) { return ops::scale_by(t.constant(Tensor::scalar(0.7)), x); }, mat(3, 2));
    expect_primitive_gradient("add_constant", [](Tape&, Var x) { return ops::add_constant(x, 3.0); }, mat(2, 3));
    expect_primitive_gradient("hadamard", [](Tape&, Var x) { return ops::hadamard(x, x); }, mat(3, 3));
    expect_primitive_gradient("relu", [](Tape&, Var x) { return ops::relu(x); },
                              [](Rng& rng) { return away_from_zero(3, 4, rng); });
    expect_primitive_gradient("log", [](Tape&, Var x) { return ops::log(x); }, [](Rng& rng) {
        Tensor t = random_tensor(2, 3, rng);
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.5 + std::abs(t[i]);
        return t;
    });
    expect_primitive_gradient("exp", [](Tape&, Var x) { return ops::exp(x); }, mat(2, 3));
    expect_primitive_gradient("reciprocal", [](Tape&, Var x) { return ops::reciprocal(x); },
                              [](Rng& rng) { return away_from_zero(2, 3, rng); });
    expect_primitive_gradient("transpose", [](Tape&, Var x) { return ops::transpose(x); }, mat(2, 5));
    expect_primitive_gradient("sum", [](Tape&, Var x) { return ops::sum(x); }, mat(3, 2));
    expect_primitive_gradient("row_mean", [](Tape&, Var x) { return ops::row_mean(x); }, mat(4, 3));
    expect_primitive_gradient("segment_mean", [&](Tape&, Var x) { return ops::segment_mean(x, offsets); }, mat(3, 2));
    expect_primitive_gradient("cosine_similarity", [&](Tape& t, Var x) {
        return ops::cosine_similarity(x, t.constant(Tensor::from_rows({{0.3, -1.0, 2.0, 0.5}})));
    }, mat(1, 4));
    expect_primitive_gradient("rowwise_cosine", [&](Tape& t, Var x) { return ops::rowwise_cosine(x, t.constant(other)); },
                              mat(3, 4));
    expect_primitive_gradient("rowwise_cosine-self", [](Tape&, Var x) {
        return ops::rowwise_cosine(x, ops::add_constant(x, 0.5));
    }, mat(3, 4));
    expect_primitive_gradient("softmax_cross_entropy", [&](Tape&, Var x) { return ops::softmax_cross_entropy(x, labels); },
                              mat(3, 3));
    expect_primitive_gradient("frobenius_norm", [](Tape&, Var x) { return ops::frobenius_norm(x); }, mat(3, 2));
    expect_primitive_gradient("gather_rows", [&](Tape&, Var x) { return ops::gather_rows(x, rows); }, mat(3, 2));
    expect_primitive_gradient("concat_cols", [&](Tape& t, Var x) { return ops::concat_cols(x, t.constant(right)); }, mat(4, 3));
    expect_primitive_gradient("block_matmul", [&](Tape&, Var x) { return ops::block_matmul(blocks, x); }, mat(3, 2));
}

TEST(Backward, SumGivesOnes) {
    Rng rng(3);
    Tape tape;
    const Var w = tape.leaf("w", random_tensor(2, 3, rng));
    EXPECT_EQ(tape.backward(ops::sum(w)).at("w"), Tensor(2, 3, 1.0));
}

TEST(Backward, FrobeniusSquareOfThreeFour) {
    Tape tape;
    const Var w = tape.leaf("w", Tensor::from_rows({{3, 4}}));
    const Var n = ops::frobenius_norm(w);
    const Tensor g = tape.backward(ops::hadamard(n, n)).at("w");
    EXPECT_NEAR(g(0, 0), 6.0, 1e-12);
    EXPECT_NEAR(g(0, 1), 8.0, 1e-12);
}

TEST(Backward, CosineGradientAtOrthogonalUnitVectors) {
    // d/dv (v·w)/(|v||w|) = w/(|v||w|) − (v·w) v/(|v|³|w|) = w when v ⟂ w, |v| = |w| = 1.
    Tape tape;
    const Tensor wv = Tensor::from_rows({{0.6, -0.8, 0.0}});
    const Var v = tape.leaf("v", Tensor::from_rows({{0.8, 0.6, 0.0}}));
    const Tensor g = tape.backward(ops::cosine_similarity(v, tape.constant(wv))).at("v");
    EXPECT_LT(max_abs_diff(g, wv), 1e-15);
}

TEST(Backward, UnreachedLeafGetsZeros) {
    Tape tape;
    const Var a = tape.leaf("a", Tensor(2, 2, 1.0));
    tape.leaf("b", Tensor(1, 3, 5.0));
    const Gradients g = tape.backward(ops::sum(a));
    EXPECT_EQ(g.at("b"), Tensor(1, 3, 0.0));
}

TEST(Backward, DeterministicAcrossRebuilds) {
    auto run = [] {
        Rng rng(11);
        Tape tape;
        const Var x = tape.leaf("x", random_tensor(4, 3, rng));
        const Var y = ops::relu(ops::matmul(x, tape.constant(random_tensor(3, 3, rng))));
        const Var root = ops::frobenius_norm(ops::rowwise_cosine(y, ops::add_constant(x, 1.0)));
        return std::make_pair(root.value(), tape.backward(root).at("x"));
    };
    const auto a = run(), b = run();
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
}

TEST(LeastSquares, SelfProjectionIsIdentity) {
    Rng rng(4);
    Tensor h = random_tensor(4, 4, rng);
    for (std::size_t i = 0; i < 4; ++i) h(i, i) += 3.0;
    const Tensor p = least_squares_solve(h, h, 0.0);
    EXPECT_LT(max_abs_diff(p, Tensor::identity(4)), 1e-12);
    EXPECT_LT(frobenius_norm(subtract(matmul(h, p), h)), 1e-12);
}

TEST(LeastSquares, WorkedInstance) {
    const Tensor ht = Tensor::from_rows({{1, 0}, {0, 1}, {1, 1}});
    const Tensor hs = Tensor::from_rows({{1, 0}, {0, 1}, {0, 0}});
    const Tensor p = least_squares_solve(ht, hs, 0.0);
    // Hand oracle: HtᵀHt = [[2,1],[1,2]], its inverse (1/3)[[2,−1],[−1,2]], HtᵀHs = I.
    const Tensor expected = Tensor::from_rows({{2.0 / 3, -1.0 / 3}, {-1.0 / 3, 2.0 / 3}});
    EXPECT_LT(max_abs_diff(p, expected), 1e-12);
    EXPECT_NEAR(frobenius_norm(subtract(matmul(ht, p), hs)), std::sqrt(2.0 / 3.0), 1e-12);
}

TEST(LeastSquares, NormalEquationsHold) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor ht = random_tensor(12, 4, rng), hs = random_tensor(12, 4, rng);
        const Tensor p = least_squares_solve(ht, hs, 0.0);
        const Tensor htt = transpose(ht);
        const Tensor rhs = matmul(htt, hs);
        EXPECT_LT(frobenius_norm(subtract(matmul(matmul(htt, ht), p), rhs)), 1e-9 * frobenius_norm(rhs));
    }
}

TEST(LeastSquares, ResidualBeatsPerturbations) {
    Rng rng(6);
    const Tensor ht = random_tensor(12, 4, rng), hs = random_tensor(12, 4, rng);
    const Tensor p = least_squares_solve(ht, hs, 0.0);
    const double best = frobenius_norm(subtract(matmul(ht, p), hs));
    for (int k = 0; k < 100; ++k) {
        Tensor delta = random_tensor(4, 4, rng);
        const double n = frobenius_norm(delta);
        Tensor moved = p;
        for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += 1e-3 * delta[i] / n;
        EXPECT_LE(best, frobenius_norm(subtract(matmul(ht, moved), hs)));
    }
}

TEST(LeastSquares, RidgeShrinksTowardZero) {
    Rng rng(7);
    const Tensor ht = random_tensor(10, 3, rng), hs = random_tensor(10, 3, rng);
    EXPECT_LT(frobenius_norm(least_squares_solve(ht, hs, 100.0)), frobenius_norm(least_squares_solve(ht, hs, 0.0)));
}

TEST(LeastSquares, SingularWithoutRidgeThrows) {
    const Tensor ht = Tensor::from_rows({{1, 2}, {2, 4}, {3, 6}});
    const Tensor hs = Tensor::from_rows({{1, 0}, {0, 1}, {1, 1}});
    EXPECT_THROW(least_squares_solve(ht, hs, 0.0), SingularityError);
    EXPECT_NO_THROW(least_squares_solve(ht, hs, 1e-6));
}

TEST(PseudoInverse, PenroseConditions) {
    Rng rng(8);
    const Tensor a = matmul(random_tensor(5, 2, rng), random_tensor(2, 4, rng));
    const Tensor p = pseudo_inverse(a);
    EXPECT_EQ(numerical_rank(a), 2u);
    EXPECT_LT(max_abs_diff(matmul(matmul(a, p), a), a), 1e-10);
    EXPECT_LT(max_abs_diff(matmul(matmul(p, a), p), p), 1e-10);
    const Tensor ap = matmul(a, p);
    EXPECT_LT(max_abs_diff(ap, transpose(ap)), 1e-10);
}

TEST(GradCheck, QuadraticIsExact) {
    Rng rng(9);
    ParameterSet params;
    params.add("w", random_tensor(3, 4, rng));
    const auto report = finite_diff_check(
        [](Tape& t, const ParameterSet& p) {
            const Var n = ops::frobenius_norm(t.parameter(p, "w"));
            return ops::hadamard(n, n);
        },
        params, 1e-5, 1e-8);
    EXPECT_TRUE(report.passed()) << report.worst;
    EXPECT_EQ(report.entries_checked, 12u);
}

TEST(GradCheck, ConstantLossHasZeroGradients) {
    ParameterSet params;
    params.add("w", Tensor(2, 2, 1.0));
    const auto report = finite_diff_check(
        [](Tape& t, const ParameterSet& p) {
            t.parameter(p, "w");
            return t.constant(Tensor::scalar(4.0));
        },
        params, 1e-5, 1e-8);
    EXPECT_EQ(report.worst, 0.0);
}

TEST(GradCheck, DetectsWrongGradient) {
    // A primitive recorded with a deliberately wrong backward must fail the check.
    ParameterSet params;
    params.add("w", Tensor::from_rows({{1.0, 2.0}}));
    const auto report = finite_diff_check(
        [](Tape& t, const ParameterSet& p) {
            const Var w = t.parameter(p, "w");
            Tensor v(1, 1, w.value()[0] * w.value()[0] + w.value()[1]);
            return t.record("bad", {w.id()}, std::move(v),
                            [](const Tape&, const Tensor& up, std::span<Tensor* const> g) {
                                if (g[0]) {
                                    (*g[0])[0] += up[0];  // should be 2·w₀
                                    (*g[0])[1] += up[0];
                                }
                            });
        },
        params, 1e-5, 1e-4);
    EXPECT_FALSE(report.passed());
    EXPECT_EQ(report.worst_parameter, "w");
    EXPECT_EQ(report.worst_index, 0u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    // With bias correction the first Adam step is lr·sign(g) (up to ε).
    ParameterSet params;
    params.add("w", Tensor::from_rows({{1.0, -1.0}}));
    adam_step(params, {{"w", Tensor::from_rows({{0.5, -2.0}})}}, AdamConfig{0.1});
    EXPECT_NEAR(params.at("w")(0, 0), 0.9, 1e-7);
    EXPECT_NEAR(params.at("w")(0, 1), -0.9, 1e-7);
}

TEST(Adam, FrozenSetRefusesUpdates) {
    ParameterSet params;
    params.add("w", Tensor(1, 1, 1.0));
    params.freeze();
    EXPECT_THROW(adam_step(params, {{"w", Tensor(1, 1, 1.0)}}, AdamConfig{}), ContractError);
}

TEST(Glorot, RespectsLimit) {
    Rng rng(10);
    const Tensor w = glorot_uniform(6, 10, rng);
    const double limit = std::sqrt(6.0 / 16.0);
    for (double v : w.values()) EXPECT_LE(std::abs(v), limit);
}
