#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace jive {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using VectorRef = Eigen::Ref<const Vector>;

/// Throws InputError unless `m` is non-empty and every entry is finite.
void require_valid(const Matrix& m, std::string_view what);

/// Subtracts each row's mean.
Matrix center_rows(const Matrix& m);

bool is_row_centered(const Matrix& m, double tol = 1e-8);

/// Thin factorization m ~ left * diag(singular_values) * right^T.
///
/// Columns of `left` (d x r) and `right` (n x r) are orthonormal and the
/// singular values are sorted non-increasing. Each pair is sign-normalized so
/// that the largest-magnitude entry of the left vector is positive.
struct SvdFactors {
  Matrix left;
  Vector singular_values;
  Matrix right;

  Index rank() const { return singular_values.size(); }
  Matrix reconstruct() const;
};

/// Best rank-`rank` approximation (Eckart-Young). Requires 1 <= rank <= min(rows, cols).
SvdFactors truncated_svd(const Matrix& m, Index rank);

struct PcaResult {
  Matrix scores;    // r x n, loadings^T * m
  Matrix loadings;  // d x r, orthonormal columns
  Vector variances; // per component, non-increasing
};

/// PCA of a row-centered feature-by-case matrix. Throws PreconditionError if
/// any row mean exceeds 1e-8 in magnitude.
PcaResult pca(const Matrix& m, Index rank);

/// Angle in degrees between the lines spanned by u and v, in [0, 90].
double vector_angle(const VectorRef& u, const VectorRef& v);

}  // namespace jive
