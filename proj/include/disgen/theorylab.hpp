#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "disgen/rng.hpp"
#include "disgen/tensor.hpp"

namespace disgen {

using VectorMap = std::function<std::vector<double>(std::span<const double>)>;

/// h_t, h_s : R^{2c} → R^{d_h}. Coordinates of r are (t̃₁..t̃_c, s̃₁..s̃_c).
struct SmoothFunctionPair {
    std::size_t c = 1;
    std::size_t d_h = 3;
    VectorMap h_task;
    VectorMap h_size;
    std::vector<double> r0;
    bool decoupled = false;  // h_t reads only t̃ and h_s only s̃
    std::string descriptor;
};

/// Row 0: values at r₀; rows 1..2c: partial derivatives in coordinate order.
struct TaylorSystem {
    Tensor b;  // from h_s, (2c+1)×d_h
    Tensor c;  // from h_t
};

/// Central differences at `step`. Throws ProbeError on a non-finite
/// evaluation, naming the coordinate.
TaylorSystem build_taylor_system(const SmoothFunctionPair& pair, std::span<const double> r0, double step = 1e-4);

struct ConsistencyReport {
    bool consistent = false;
    Tensor p;                          // C⁺B
    double residual = 0.0;             // ‖CP − B‖_F
    double pseudo_inverse_residual = 0.0;  // ‖CC⁺B − B‖_F
    double tolerance = 0.0;            // 1e-8·(1 + ‖B‖_F)
    std::size_t rank = 0;              // numerical rank of C
};

/// CP = B is consistent iff CC⁺B = B; reports P = C⁺B either way.
ConsistencyReport solve_matrix_equation(const Tensor& c, const Tensor& b);

struct DecouplingProbe {
    std::vector<double> radii;
    std::vector<double> max_residual;  // max over sphere samples of ‖h_t P − h_s‖
    std::vector<double> ratio_first;   // max_residual / ρ
    std::vector<double> ratio_second;  // max_residual / ρ²
    std::vector<std::size_t> fit_rank; // numerical rank of the fitted P per radius
    double slope = 0.0;                // least-squares slope of log residual vs log ρ
    std::vector<double> noise_floor;   // per radius; residuals at or below it are treated as exact
    std::size_t samples_per_radius = 0;

    static constexpr double kSecondOrderSlope = 1.8;
    bool second_order() const noexcept { return slope > kSecondOrderSlope; }
};

/// For each radius, fits P by least squares over points on the sphere
/// ‖r − r₀‖ = ρ and records the worst residual. Radii must be strictly
/// decreasing and positive; `samples` must be at least d_h (ContractError).
/// Radii whose residual sits under eps·κ_F(H_t)·(1 + max|h_s|) are left out
/// of the slope fit, which uses the six smallest usable radii; if fewer than
/// two remain the slope is +inf (exact fit).
DecouplingProbe decoupling_probe(const SmoothFunctionPair& pair, std::span<const double> radii, std::size_t samples,
                                 std::uint64_t seed);

/// Default radii: 0.1·2^{-k}, k = 0..9.
std::vector<double> default_probe_radii();

// Generator families -------------------------------------------------------

/// h_t = tanh(W_t t̃ + a), h_s = tanh(W_s s̃ + a'), random W, nonzero gradients.
SmoothFunctionPair make_decoupled_pair(std::size_t c, std::size_t d_h, Rng& rng);

/// h_t(r) = C₀ + Σᵢ Δᵢ Cᵢ + q_t(Δ), h_s(r) = B₀ + Σᵢ Δᵢ Bᵢ + q_s(Δ) with
/// B = C P₀ for a random full-rank P₀ and random quadratic forms q, Δ = r − r₀.
SmoothFunctionPair make_constructed_pair(std::size_t c, std::size_t d_h, Rng& rng);

/// h_t(r) = (t̃, 0, …), h_s(r) = (s̃, 0, …) padded to d_h.
SmoothFunctionPair make_padded_pair(std::size_t c, std::size_t d_h, std::span<const double> r0);

/// h_s = h_t·R + quadratic perturbation for a smooth random h_t.
SmoothFunctionPair make_entangled_pair(std::size_t c, std::size_t d_h, Rng& rng);

/// h_s = h_t.
SmoothFunctionPair make_identical_pair(std::size_t c, std::size_t d_h, Rng& rng);

// Upper bound ---------------------------------------------------------------

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const noexcept { return lo.size(); }
    double volume() const;
    bool contains(std::span<const double> r) const;
};

struct BoundInputs {
    Box s;
    Box s_prime;
    std::vector<double> r0;
    double rho1 = 0.5;
    double rho2 = 2.0;
    double m0 = 1.0;
    double eps0 = 0.1;
    double b = 1.0;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
};

struct BoundReport {
    double bound = 0.0;  // U
    double term_inner = 0.0;  // 3bε₀²V_{S_ε₀}/(ρ₂V_S)
    double term_outer = 0.0;  // 3bε₁V_{S'∖S_ε₀}‖r′ − r₀‖/V_S
    double eps1 = 0.0;
    double r_prime_distance = 0.0;
    double volume_s = 0.0;
    double volume_s_prime = 0.0;
    double volume_inner = 0.0;  // S_ε₀ ∩ S′
    double volume_outer = 0.0;  // S′ ∖ S_ε₀
};

/// ε₁ = ρ₂ · max_{r∈S′} ‖r − r₀‖, the smallest ε with S_ε ⊇ S′.
double smallest_covering_eps(const BoundInputs& in);

/// Monte Carlo estimate of U from seeded uniform samples of S. Throws
/// PreconditionError unless 0 < ρ₁ < ρ₂, S′ ⊆ S, r₀ ∈ S′ and ε₀ < ε₁.
BoundReport upper_bound_estimate(const BoundInputs& in);

struct SoundnessReport {
    BoundReport bound;
    std::vector<double> integrals;  // 3b∫_S‖y‖/V_S per Ω member
    std::size_t violations = 0;     // integrals exceeding U
};

/// Draws `members` random functions y ∈ Ω (ρ₁d² < ‖y‖ < ρ₂d² on S′, mass
/// below M₀ outside) and compares each Monte Carlo integral, on the same
/// samples used for U, against U.
SoundnessReport bound_soundness_check(const BoundInputs& in, std::size_t members, std::size_t d_h);

// Consistency test systems ------------------------------------------------

struct MatrixSystem {
    Tensor c;
    Tensor b;
    bool consistent = false;
};

/// Rank-deficient C (m×n, rank < m) with B = C·X.
MatrixSystem make_consistent_system(std::size_t m, std::size_t n, std::size_t cols, Rng& rng);

/// Same, plus a component of norm ≥ `outside_norm` orthogonal to range(C).
MatrixSystem make_inconsistent_system(std::size_t m, std::size_t n, std::size_t cols, double outside_norm, Rng& rng);

// Reports -------------------------------------------------------------------

std::string probe_json(const SmoothFunctionPair& pair, const DecouplingProbe& probe);
std::string bound_json(const BoundInputs& in, const SoundnessReport& report);

}  // namespace disgen
