#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace disgen {

/// Dense row-major matrix of doubles. Vectors are 1×n or n×1, scalars 1×1.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Tensor scalar(double v) { return Tensor(1, 1, v); }
    static Tensor identity(std::size_t n);
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::array<std::size_t, 2> shape() const noexcept { return {rows_, cols_}; }
    bool is_scalar() const noexcept { return rows_ == 1 && cols_ == 1; }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    double item() const;

    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool all_finite() const noexcept;
    void fill(double v);

    /// Elementwise `this += other`; shapes must match.
    Tensor& operator+=(const Tensor& other);

    bool operator==(const Tensor& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

std::string shape_string(const Tensor& t);

double frobenius_norm(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

// Plain (tape-free) helpers used by the solvers and the test oracles.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor subtract(const Tensor& a, const Tensor& b);

}  // namespace disgen
