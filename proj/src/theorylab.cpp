#include "disgen/theorylab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "disgen/error.hpp"
#include "disgen/linalg.hpp"
#include "json.hpp"

namespace disgen {

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Tensor t(rows, cols);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

std::vector<double> random_vector(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

/// Random full-rank square matrix: I + 0.5·G keeps it comfortably invertible.
Tensor random_invertible(std::size_t n, Rng& rng) {
    Tensor t = random_matrix(n, n, rng);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] *= 0.5 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) t(i, i) += 1.0;
    return t;
}

/// q(Δ)_j = Δᵀ Q_j Δ for d random symmetric forms.
struct QuadraticMap {
    std::vector<Tensor> forms;

    QuadraticMap(std::size_t dim, std::size_t outputs, Rng& rng) {
        for (std::size_t j = 0; j < outputs; ++j) {
            Tensor q = random_matrix(dim, dim, rng);
            forms.push_back(Tensor(dim, dim));
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = 0; b < dim; ++b) forms.back()(a, b) = 0.5 * (q(a, b) + q(b, a));
        }
    }

    double eval(std::size_t j, std::span<const double> d) const {
        double s = 0.0;
        for (std::size_t a = 0; a < d.size(); ++a)
            for (std::size_t b = 0; b < d.size(); ++b) s += d[a] * forms[j](a, b) * d[b];
        return s;
    }
};

/// y = x·M for a row vector x.
std::vector<double> row_times(std::span<const double> x, const Tensor& m) {
    std::vector<double> out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out[j] += x[i] * m(i, j);
    return out;
}

}  // namespace

TaylorSystem build_taylor_system(const SmoothFunctionPair& pair, std::span<const double> r0, double step) {
    const std::size_t dim = 2 * pair.c;
    if (r0.size() != dim) throw DimensionError("build_taylor_system: r0 has " + std::to_string(r0.size()) +
                                               " coordinates, expected " + std::to_string(dim));
    if (!(step > 0.0)) throw ContractError("build_taylor_system: step must be positive");
    TaylorSystem sys{Tensor(dim + 1, pair.d_h), Tensor(dim + 1, pair.d_h)};

    auto eval = [&](const VectorMap& f, std::span<const double> r, std::size_t coordinate) {
        std::vector<double> v = f(r);
        if (v.size() != pair.d_h) throw DimensionError("build_taylor_system: map returned wrong width");
        for (double x : v) {
            if (!std::isfinite(x)) {
                throw ProbeError("build_taylor_system: non-finite evaluation while probing coordinate " +
                                 std::to_string(coordinate));
            }
        }
        return v;
    };
    auto fill = [&](const VectorMap& f, Tensor& out) {
        const auto base = eval(f, r0, 0);
        for (std::size_t j = 0; j < pair.d_h; ++j) out(0, j) = base[j];
        std::vector<double> r(r0.begin(), r0.end());
        for (std::size_t i = 0; i < dim; ++i) {
            r[i] = r0[i] + step;
            const auto plus = eval(f, r, i);
            r[i] = r0[i] - step;
            const auto minus = eval(f, r, i);
            r[i] = r0[i];
            for (std::size_t j = 0; j < pair.d_h; ++j) out(i + 1, j) = (plus[j] - minus[j]) / (2.0 * step);
        }
    };
    fill(pair.h_size, sys.b);
    fill(pair.h_task, sys.c);
    return sys;
}

ConsistencyReport solve_matrix_equation(const Tensor& c, const Tensor& b) {
    if (c.rows() != b.rows()) {
        throw DimensionError("solve_matrix_equation: C " + shape_string(c) + " and B " + shape_string(b) +
                             " differ in rows");
    }
    ConsistencyReport r;
    const Tensor pinv = pseudo_inverse(c, 1e-10);
    r.p = matmul(pinv, b);
    r.rank = numerical_rank(c, 1e-10);
    const Tensor cp = matmul(c, r.p);  // C C⁺ B
    r.residual = frobenius_norm(subtract(cp, b));
    r.pseudo_inverse_residual = r.residual;
    r.tolerance = 1e-8 * (1.0 + frobenius_norm(b));
    r.consistent = r.pseudo_inverse_residual < r.tolerance;
    return r;
}

std::vector<double> default_probe_radii() {
    std::vector<double> radii;
    for (int k = 0; k <= 9; ++k) radii.push_back(0.1 * std::ldexp(1.0, -k));
    return radii;
}

DecouplingProbe decoupling_probe(const SmoothFunctionPair& pair, std::span<const double> radii, std::size_t samples,
                                 std::uint64_t seed) {
    constexpr std::size_t kSlopeWindow = 6;
    const std::size_t dim = 2 * pair.c;
    if (samples < pair.d_h) {
        throw ContractError("decoupling_probe: " + std::to_string(samples) + " samples cannot fit a " +
                            std::to_string(pair.d_h) + "-wide projection");
    }
    if (radii.size() < 2) throw ContractError("decoupling_probe: need at least two radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] < radii[i - 1]))) {
            throw ContractError("decoupling_probe: radii must be positive and strictly decreasing");
        }
    }

    // One set of directions shared by every radius keeps the slope fit smooth.
    Rng rng(seed);
    std::vector<std::vector<double>> directions(samples);
    for (auto& d : directions) {
        double n = 0.0;
        while (n < 1e-12) {
            d = random_vector(dim, rng);
            n = norm(d);
        }
        for (double& x : d) x /= n;
    }

    DecouplingProbe probe;
    probe.samples_per_radius = samples;
    for (double rho : radii) {
        double scale = 0.0;
        Tensor ht(samples, pair.d_h), hs(samples, pair.d_h);
        std::vector<double> r(dim);
        for (std::size_t k = 0; k < samples; ++k) {
            for (std::size_t i = 0; i < dim; ++i) r[i] = pair.r0[i] + rho * directions[k][i];
            const auto t = pair.h_task(r);
            const auto s = pair.h_size(r);
            for (std::size_t j = 0; j < pair.d_h; ++j) {
                ht(k, j) = t[j];
                hs(k, j) = s[j];
                scale = std::max(scale, std::abs(s[j]));
            }
        }
        const Tensor ht_pinv = pseudo_inverse(ht, 1e-13);
        const Tensor p = matmul(ht_pinv, hs);
        const Tensor residual = subtract(matmul(ht, p), hs);
        double worst = 0.0;
        for (std::size_t k = 0; k < samples; ++k) {
            double sq = 0.0;
            for (std::size_t j = 0; j < pair.d_h; ++j) sq += residual(k, j) * residual(k, j);
            worst = std::max(worst, std::sqrt(sq));
        }
        probe.radii.push_back(rho);
        probe.max_residual.push_back(worst);
        probe.ratio_first.push_back(worst / rho);
        probe.ratio_second.push_back(worst / (rho * rho));
        probe.fit_rank.push_back(numerical_rank(p, 1e-10));
        // roundoff level of a least-squares residual: eps·κ(H_t)·scale
        const double kappa = frobenius_norm(ht) * frobenius_norm(ht_pinv);
        probe.noise_floor.push_back(std::numeric_limits<double>::epsilon() * kappa * (1.0 + scale));
    }

    // Residuals under the floor are roundoff of an exact fit and carry no
    // decay information; with fewer than two usable radii the order is unbounded.
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (probe.max_residual[i] <= probe.noise_floor[i]) continue;
        xs.push_back(std::log(probe.radii[i]));
        ys.push_back(std::log(probe.max_residual[i]));
    }
    if (xs.size() < 2) {
        probe.slope = std::numeric_limits<double>::infinity();
        return probe;
    }
    // the order is a small-radius limit, so only the smallest usable radii count
    if (xs.size() > kSlopeWindow) {
        xs.erase(xs.begin(), xs.end() - kSlopeWindow);
        ys.erase(ys.begin(), ys.end() - kSlopeWindow);
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    probe.slope = sxy / sxx;
    return probe;
}

SmoothFunctionPair make_decoupled_pair(std::size_t c, std::size_t d_h, Rng& rng) {
    const Tensor wt = random_matrix(c, d_h, rng), ws = random_matrix(c, d_h, rng);
    const auto at = random_vector(d_h, rng), as = random_vector(d_h, rng);
    SmoothFunctionPair pair;
    pair.c = c;
    pair.d_h = d_h;
    pair.decoupled = true;
    pair.descriptor = "decoupled tanh pair";
    pair.r0 = random_vector(2 * c, rng);
    for (double& x : pair.r0) x *= 0.3;
    auto make = [c, d_h](Tensor w, std::vector<double> a, std::size_t offset) {
        return [c, d_h, w = std::move(w), a = std::move(a), offset](std::span<const double> r) {
            std::vector<double> out = row_times(r.subspan(offset, c), w);
            for (std::size_t j = 0; j < d_h; ++j) out[j] = std::tanh(0.5 * out[j] + 0.3 * a[j]);
            return out;
        };
    };
    pair.h_task = make(wt, at, 0);
    pair.h_size = make(ws, as, c);
    return pair;
}

SmoothFunctionPair make_constructed_pair(std::size_t c, std::size_t d_h, Rng& rng) {
    const std::size_t dim = 2 * c;
    const Tensor cm = random_matrix(dim + 1, d_h, rng);
    const Tensor p0 = random_invertible(d_h, rng);
    const Tensor bm = matmul(cm, p0);
    const QuadraticMap qt(dim, d_h, rng), qs(dim, d_h, rng);
    SmoothFunctionPair pair;
    pair.c = c;
    pair.d_h = d_h;
    pair.descriptor = "consistent Taylor construction";
    pair.r0 = random_vector(dim, rng);
    for (double& x : pair.r0) x *= 0.3;
    auto make = [dim, d_h, r0 = pair.r0](Tensor m, QuadraticMap q) {
        return [dim, d_h, r0, m = std::move(m), q = std::move(q)](std::span<const double> r) {
            std::vector<double> delta(dim);
            for (std::size_t i = 0; i < dim; ++i) delta[i] = r[i] - r0[i];
            std::vector<double> out(d_h);
            for (std::size_t j = 0; j < d_h; ++j) {
                double v = m(0, j);
                for (std::size_t i = 0; i < dim; ++i) v += delta[i] * m(i + 1, j);
                out[j] = v + q.eval(j, delta);
            }
            return out;
        };
    };
    pair.h_task = make(cm, qt);
    pair.h_size = make(bm, qs);
    return pair;
}

SmoothFunctionPair make_padded_pair(std::size_t c, std::size_t d_h, std::span<const double> r0) {
    if (d_h < c) throw ContractError("make_padded_pair: d_h must be at least c");
    SmoothFunctionPair pair;
    pair.c = c;
    pair.d_h = d_h;
    pair.decoupled = true;
    pair.descriptor = "padded coordinate pair";
    pair.r0.assign(r0.begin(), r0.end());
    auto make = [c, d_h](std::size_t offset) {
        return [c, d_h, offset](std::span<const double> r) {
            std::vector<double> out(d_h, 0.0);
            for (std::size_t i = 0; i < c; ++i) out[i] = r[offset + i];
            return out;
        };
    };
    pair.h_task = make(0);
    pair.h_size = make(c);
    return pair;
}

SmoothFunctionPair make_entangled_pair(std::size_t c, std::size_t d_h, Rng& rng) {
    const std::size_t dim = 2 * c;
    const Tensor w = random_matrix(dim, d_h, rng);
    const auto a = random_vector(d_h, rng);
    const Tensor rmat = random_invertible(d_h, rng);
    const QuadraticMap q(dim, d_h, rng);
    SmoothFunctionPair pair;
    pair.c = c;
    pair.d_h = d_h;
    pair.descriptor = "h_s = h_t R + quadratic";
    pair.r0 = random_vector(dim, rng);
    for (double& x : pair.r0) x *= 0.3;
    auto ht = [w, a, d_h](std::span<const double> r) {
        std::vector<double> out = row_times(r, w);
        for (std::size_t j = 0; j < d_h; ++j) out[j] = std::tanh(0.5 * out[j] + 0.3 * a[j]);
        return out;
    };
    pair.h_task = ht;
    pair.h_size = [ht, rmat, q, r0 = pair.r0, dim, d_h](std::span<const double> r) {
        std::vector<double> out = row_times(ht(r), rmat);
        std::vector<double> delta(dim);
        for (std::size_t i = 0; i < dim; ++i) delta[i] = r[i] - r0[i];
        for (std::size_t j = 0; j < d_h; ++j) out[j] += q.eval(j, delta);
        return out;
    };
    return pair;
}

SmoothFunctionPair make_identical_pair(std::size_t c, std::size_t d_h, Rng& rng) {
    SmoothFunctionPair pair = make_entangled_pair(c, d_h, rng);
    pair.descriptor = "identical maps";
    pair.h_size = pair.h_task;
    return pair;
}

double Box::volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
}

bool Box::contains(std::span<const double> r) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (r[i] < lo[i] || r[i] > hi[i]) return false;
    return true;
}

double smallest_covering_eps(const BoundInputs& in) {
    // Farthest point of a box from r₀ is a corner: per axis, the farther face.
    double sq = 0.0;
    for (std::size_t i = 0; i < in.s_prime.dim(); ++i) {
        const double d = std::max(std::abs(in.s_prime.lo[i] - in.r0[i]), std::abs(in.s_prime.hi[i] - in.r0[i]));
        sq += d * d;
    }
    return in.rho2 * std::sqrt(sq);
}

namespace {

void check_bound_inputs(const BoundInputs& in) {
    const std::size_t dim = in.s.dim();
    if (dim == 0 || in.s.hi.size() != dim || in.s_prime.dim() != dim || in.s_prime.hi.size() != dim ||
        in.r0.size() != dim) {
        throw PreconditionError("upper_bound_estimate: S, S' and r0 must share one dimension");
    }
    if (!(in.rho1 > 0.0 && in.rho1 < in.rho2)) throw PreconditionError("upper_bound_estimate: need 0 < rho1 < rho2");
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(in.s.lo[i] < in.s.hi[i]) || !(in.s_prime.lo[i] < in.s_prime.hi[i])) {
            throw PreconditionError("upper_bound_estimate: empty box");
        }
        if (in.s_prime.lo[i] < in.s.lo[i] || in.s_prime.hi[i] > in.s.hi[i]) {
            throw PreconditionError("upper_bound_estimate: S' must lie inside S");
        }
    }
    if (!in.s_prime.contains(in.r0)) throw PreconditionError("upper_bound_estimate: r0 must lie in S'");
    if (!(in.m0 > 0.0 && in.b > 0.0 && in.eps0 > 0.0)) {
        throw PreconditionError("upper_bound_estimate: M0, b and eps0 must be positive");
    }
    if (in.samples == 0) throw PreconditionError("upper_bound_estimate: need at least one sample");
    const double eps1 = smallest_covering_eps(in);
    if (!(in.eps0 < eps1)) {
        throw PreconditionError("upper_bound_estimate: eps0 = " + std::to_string(in.eps0) +
                                " must be below eps1 = " + std::to_string(eps1));
    }
}

std::vector<std::vector<double>> sample_box(const Box& box, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> out(count, std::vector<double>(box.dim()));
    for (auto& r : out)
        for (std::size_t i = 0; i < box.dim(); ++i) r[i] = rng.uniform(box.lo[i], box.hi[i]);
    return out;
}

BoundReport bound_from_samples(const BoundInputs& in, const std::vector<std::vector<double>>& samples) {
    BoundReport r;
    r.eps1 = smallest_covering_eps(in);
    r.volume_s = in.s.volume();
    const double radius = in.eps0 / in.rho2;
    std::size_t in_prime = 0, inner = 0, outer = 0;
    for (const auto& x : samples) {
        if (!in.s_prime.contains(x)) continue;
        ++in_prime;
        const double d = distance(x, in.r0);
        if (d < radius) {
            ++inner;
        } else {
            ++outer;
            r.r_prime_distance = std::max(r.r_prime_distance, d);
        }
    }
    const double n = static_cast<double>(samples.size());
    r.volume_s_prime = r.volume_s * static_cast<double>(in_prime) / n;
    r.volume_inner = r.volume_s * static_cast<double>(inner) / n;
    r.volume_outer = r.volume_s * static_cast<double>(outer) / n;
    r.term_inner = 3.0 * in.b * in.eps0 * in.eps0 * r.volume_inner / (in.rho2 * r.volume_s);
    r.term_outer = 3.0 * in.b * r.eps1 * r.volume_outer * r.r_prime_distance / r.volume_s;
    r.bound = r.term_inner + r.term_outer + in.m0;
    return r;
}

}  // namespace

BoundReport upper_bound_estimate(const BoundInputs& in) {
    check_bound_inputs(in);
    return bound_from_samples(in, sample_box(in.s, in.samples, in.seed));
}

SoundnessReport bound_soundness_check(const BoundInputs& in, std::size_t members, std::size_t d_h) {
    check_bound_inputs(in);
    if (d_h == 0) throw ContractError("bound_soundness_check: d_h must be positive");
    const auto samples = sample_box(in.s, in.samples, in.seed);
    SoundnessReport report;
    report.bound = bound_from_samples(in, samples);

    const std::size_t dim = in.s.dim();
    const double n = static_cast<double>(samples.size());
    Rng rng(in.seed ^ 0xB0B0ULL);
    for (std::size_t m = 0; m < members; ++m) {
        // Inside S′: ‖y‖ = g(r)·d², g strictly between ρ₁ and ρ₂; direction varies smoothly.
        const auto a = random_vector(dim, rng);
        const double a0 = rng.normal();
        const Tensor dir = random_matrix(dim, d_h, rng);
        const auto dir0 = random_vector(d_h, rng);
        const auto w = random_vector(dim, rng);
        auto envelope = [&](std::span<const double> r) {
            double z = a0;
            for (std::size_t i = 0; i < dim; ++i) z += a[i] * (r[i] - in.r0[i]);
            const double sig = 1.0 / (1.0 + std::exp(-z));
            return in.rho1 + (in.rho2 - in.rho1) * (0.05 + 0.9 * sig);
        };
        auto magnitude_outside = [&](std::span<const double> r) {
            double z = 0.0;
            for (std::size_t i = 0; i < dim; ++i) z += w[i] * r[i];
            return 1.0 + std::abs(std::sin(z));
        };
        auto direction = [&](std::span<const double> r) {
            std::vector<double> delta(dim);
            for (std::size_t i = 0; i < dim; ++i) delta[i] = r[i] - in.r0[i];
            std::vector<double> u = row_times(delta, dir);
            for (std::size_t j = 0; j < d_h; ++j) u[j] += dir0[j];
            const double un = norm(u);
            if (un < 1e-12) {
                std::fill(u.begin(), u.end(), 0.0);
                u[0] = 1.0;
                return u;
            }
            for (double& x : u) x /= un;
            return u;
        };

        // Scale the outside part so its Monte Carlo mass is a fraction of M₀.
        double raw_outside = 0.0;
        for (const auto& x : samples)
            if (!in.s_prime.contains(x)) raw_outside += magnitude_outside(x);
        raw_outside *= 3.0 * in.b / n;
        const double outside_scale = raw_outside > 0.0 ? rng.uniform(0.1, 0.9) * in.m0 / raw_outside : 0.0;

        double integral = 0.0;
        for (const auto& x : samples) {
            double mag = 0.0;
            if (in.s_prime.contains(x)) {
                const double d = distance(x, in.r0);
                mag = envelope(x) * d * d;
            } else {
                mag = outside_scale * magnitude_outside(x);
            }
            // ‖y‖ equals mag; the direction only fixes the vector, checked here for finiteness.
            const auto u = direction(x);
            integral += mag * norm(u);
        }
        integral *= 3.0 * in.b / n;
        report.integrals.push_back(integral);
        if (!(integral <= report.bound.bound)) ++report.violations;
    }
    return report;
}

MatrixSystem make_consistent_system(std::size_t m, std::size_t n, std::size_t cols, Rng& rng) {
    if (m < 2 || n < 1) throw ContractError("make_consistent_system: need m >= 2 and n >= 1");
    const std::size_t rank = std::min(m - 1, n);
    MatrixSystem sys;
    sys.c = matmul(random_matrix(m, rank, rng), random_matrix(rank, n, rng));
    sys.b = matmul(sys.c, random_matrix(n, cols, rng));
    sys.consistent = true;
    return sys;
}

MatrixSystem make_inconsistent_system(std::size_t m, std::size_t n, std::size_t cols, double outside_norm, Rng& rng) {
    MatrixSystem sys = make_consistent_system(m, n, cols, rng);
    // Project a random matrix onto the orthogonal complement of range(C).
    Tensor noise = random_matrix(m, cols, rng);
    noise = subtract(noise, matmul(sys.c, matmul(pseudo_inverse(sys.c, 1e-10), noise)));
    const double scale = outside_norm * rng.uniform(1.0, 2.0) / frobenius_norm(noise);
    for (std::size_t i = 0; i < noise.size(); ++i) sys.b[i] += scale * noise[i];
    sys.consistent = false;
    return sys;
}

std::string probe_json(const SmoothFunctionPair& pair, const DecouplingProbe& probe) {
    nlohmann::ordered_json j;
    j["instance"] = {{"descriptor", pair.descriptor}, {"c", pair.c}, {"d_h", pair.d_h}, {"decoupled", pair.decoupled}};
    j["radii"] = probe.radii;
    j["max_residual"] = probe.max_residual;
    j["ratio_first_order"] = probe.ratio_first;
    j["ratio_second_order"] = probe.ratio_second;
    j["fit_rank"] = probe.fit_rank;
    j["samples_per_radius"] = probe.samples_per_radius;
    j["noise_floor"] = probe.noise_floor;
    if (std::isfinite(probe.slope)) {
        j["slope"] = probe.slope;
    } else {
        j["slope"] = "inf";
    }
    j["second_order"] = probe.second_order();
    j["pass"] = probe.second_order() != pair.decoupled;
    return j.dump(2) + "\n";
}

std::string bound_json(const BoundInputs& in, const SoundnessReport& report) {
    const BoundReport& b = report.bound;
    nlohmann::ordered_json j;
    j["instance"] = {{"dim", in.s.dim()}, {"rho1", in.rho1}, {"rho2", in.rho2}, {"M0", in.m0},
                     {"eps0", in.eps0},   {"b", in.b},         {"samples", in.samples}, {"seed", in.seed}};
    j["bound"] = {{"U", b.bound},
                  {"term_inner", b.term_inner},
                  {"term_outer", b.term_outer},
                  {"eps1", b.eps1},
                  {"r_prime_distance", b.r_prime_distance},
                  {"V_S", b.volume_s},
                  {"V_S_prime", b.volume_s_prime},
                  {"V_inner", b.volume_inner},
                  {"V_outer", b.volume_outer}};
    j["integrals"] = report.integrals;
    j["violations"] = report.violations;
    j["pass"] = report.violations == 0;
    return j.dump(2) + "\n";
}

}  // namespace disgen
