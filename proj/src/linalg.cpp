#include "jive/linalg.hpp"

#include "jive/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace jive {

void require_valid(const Matrix& m, std::string_view what) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw InputError(std::string(what) + ": matrix must have at least one row and one column");
  }
  if (!m.allFinite()) {
    throw InputError(std::string(what) + ": matrix contains NaN or infinite entries");
  }
}

Matrix center_rows(const Matrix& m) {
  require_valid(m, "center_rows");
  Matrix out = m;
  out.colwise() -= m.rowwise().mean();
  return out;
}

bool is_row_centered(const Matrix& m, double tol) {
  return m.cols() == 0 || (m.rowwise().mean().cwiseAbs().maxCoeff() <= tol);
}

Matrix SvdFactors::reconstruct() const {
  return left * singular_values.asDiagonal() * right.transpose();
}

SvdFactors truncated_svd(const Matrix& m, Index rank) {
  require_valid(m, "truncated_svd");
  const Index max_rank = std::min(m.rows(), m.cols());
  if (rank < 1 || rank > max_rank) {
    throw InputError("truncated_svd: rank " + std::to_string(rank) + " outside [1, " +
                     std::to_string(max_rank) + "]");
  }

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors out{svd.matrixU().leftCols(rank), svd.singularValues().head(rank),
                 svd.matrixV().leftCols(rank)};

  for (Index k = 0; k < rank; ++k) {
    Index pivot = 0;
    out.left.col(k).cwiseAbs().maxCoeff(&pivot);
    if (out.left(pivot, k) < 0.0) {
      out.left.col(k) *= -1.0;
      out.right.col(k) *= -1.0;
    }
  }
  return out;
}

PcaResult pca(const Matrix& m, Index rank) {
  require_valid(m, "pca");
  if (!is_row_centered(m)) {
    throw PreconditionError("pca: rows must be centered (|row mean| <= 1e-8)");
  }
  if (m.cols() < 2) {
    throw InputError("pca: need at least two cases");
  }
  SvdFactors f = truncated_svd(m, rank);
  PcaResult out;
  out.loadings = std::move(f.left);
  out.scores = f.singular_values.asDiagonal() * f.right.transpose();
  out.variances = f.singular_values.array().square() / static_cast<double>(m.cols() - 1);
  return out;
}

double vector_angle(const VectorRef& u, const VectorRef& v) {
  if (u.size() != v.size()) {
    throw InputError("vector_angle: vectors differ in length");
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) {
    throw InputError("vector_angle: zero vector");
  }
  // Half-angle form; acos loses about half the digits near zero.
  const Vector a = u / nu;
  const Vector b = (u.dot(v) < 0.0 ? -1.0 : 1.0) * v / nv;
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm()) * 180.0 / std::numbers::pi;
}

}  // namespace jive
