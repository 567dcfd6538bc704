#include "disgen/linalg.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "disgen/error.hpp"

namespace disgen {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix to_eigen(const Tensor& t) { return Eigen::Map<const Matrix>(t.data(), t.rows(), t.cols()); }

Tensor from_eigen(const Matrix& m) {
    Tensor t(m.rows(), m.cols());
    Eigen::Map<Matrix>(t.data(), m.rows(), m.cols()) = m;
    return t;
}

}  // namespace

Tensor least_squares_solve(const Tensor& h_task, const Tensor& h_size, double ridge) {
    if (h_task.rows() == 0) throw ContractError("least_squares_solve: need at least one row");
    if (h_task.rows() != h_size.rows()) {
        throw DimensionError("least_squares_solve: row mismatch " + shape_string(h_task) + " vs " +
                             shape_string(h_size));
    }
    if (!(ridge >= 0.0)) throw ContractError("least_squares_solve: ridge must be nonnegative");

    const Matrix ht = to_eigen(h_task);
    const Matrix hs = to_eigen(h_size);
    Matrix gram = ht.transpose() * ht;
    const Matrix rhs = ht.transpose() * hs;

    if (ridge == 0.0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (!(lo > 0.0) || hi / lo > kSingularCondition) {
            std::ostringstream msg;
            msg << "least_squares_solve: H_t^T H_t is singular (condition estimate "
                << (lo > 0.0 ? hi / lo : INFINITY) << " > " << kSingularCondition
                << "); use a positive ridge";
            throw SingularityError(msg.str());
        }
    } else {
        gram.diagonal().array() += ridge;
    }

    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw SingularityError("least_squares_solve: Cholesky failed; use a larger ridge");
    }
    return from_eigen(llt.solve(rhs));
}

namespace {

Eigen::JacobiSVD<Matrix> svd_of(const Tensor& a) {
    return Eigen::JacobiSVD<Matrix>(to_eigen(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
}

}  // namespace

Tensor pseudo_inverse(const Tensor& a, double relative_cutoff) {
    if (a.size() == 0) return Tensor(a.cols(), a.rows());
    const auto svd = svd_of(a);
    const auto& sv = svd.singularValues();
    const double cutoff = relative_cutoff * (sv.size() ? sv(0) : 0.0);
    Eigen::VectorXd inv(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) inv(i) = sv(i) > cutoff && sv(i) > 0.0 ? 1.0 / sv(i) : 0.0;
    const Matrix pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    return from_eigen(pinv);
}

std::size_t numerical_rank(const Tensor& a, double relative_cutoff) {
    if (a.size() == 0) return 0;
    const auto svd = svd_of(a);
    const auto& sv = svd.singularValues();
    const double cutoff = relative_cutoff * (sv.size() ? sv(0) : 0.0);
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
    return rank;
}

}  // namespace disgen
