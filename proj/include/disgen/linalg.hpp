#pragma once

#include "disgen/tensor.hpp"

namespace disgen {

/// Condition-number ceiling above which an unregularised Gram matrix is
/// treated as singular.
inline constexpr double kSingularCondition = 1e12;

/// Projection minimising ‖H_t P − H_s‖_F (plus ridge·‖P‖_F²):
///   P = (H_tᵀH_t + ridge·I)⁻¹ H_tᵀH_s
/// solved by Cholesky. The result is a plain tensor with no tape history.
/// Throws SingularityError when ridge == 0 and H_tᵀH_t is numerically singular.
Tensor least_squares_solve(const Tensor& h_task, const Tensor& h_size, double ridge);

/// Moore–Penrose pseudo-inverse via SVD; singular values at or below
/// `relative_cutoff · σ_max` are treated as zero.
Tensor pseudo_inverse(const Tensor& a, double relative_cutoff = 1e-10);

/// Numerical rank using the same cutoff rule as pseudo_inverse.
std::size_t numerical_rank(const Tensor& a, double relative_cutoff = 1e-10);

}  // namespace disgen
