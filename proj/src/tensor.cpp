#include "disgen/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "disgen/error.hpp"

namespace disgen {

namespace {
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows * cols) {
        throw DimensionError("tensor: " + std::to_string(values_.size()) + " values for shape [" +
                             std::to_string(rows) + "x" + std::to_string(cols) + "]");
    }
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
    return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> v;
    v.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("from_rows: ragged initializer");
        v.insert(v.end(), row.begin(), row.end());
    }
    return Tensor(r, c, std::move(v));
}

double Tensor::item() const {
    if (!is_scalar()) throw ContractError("item() on non-scalar tensor of shape " + shape_string(*this));
    return values_[0];
}

bool Tensor::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Tensor& Tensor::operator+=(const Tensor& other) {
    if (other.rows_ != rows_ || other.cols_ != cols_) {
        throw DimensionError("accumulate: " + shape_string(*this) + " vs " + shape_string(other));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

std::string shape_string(const Tensor& t) {
    return "[" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + "]";
}

double frobenius_norm(const Tensor& t) {
    double s = 0.0;
    for (double v : t.values()) s += v * v;
    return std::sqrt(s);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw DimensionError("max_abs_diff: " + shape_string(a) + " vs " + shape_string(b));
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: " + shape_string(a) + " x " + shape_string(b));
    }
    Tensor out(a.rows(), b.cols());
    if (out.size() == 0 || a.cols() == 0) return out;
    Eigen::Map<const RowMajor> ma(a.data(), a.rows(), a.cols());
    Eigen::Map<const RowMajor> mb(b.data(), b.rows(), b.cols());
    Eigen::Map<RowMajor> mo(out.data(), out.rows(), out.cols());
    mo.noalias() = ma * mb;
    return out;
}

Tensor transpose(const Tensor& a) {
    Tensor out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
    return out;
}

Tensor subtract(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw DimensionError("subtract: " + shape_string(a) + " vs " + shape_string(b));
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

}  // namespace disgen
