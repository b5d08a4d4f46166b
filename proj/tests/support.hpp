#pragma once

#include "jive/linalg.hpp"
#include "jive/random.hpp"

namespace testing {

inline jive::Matrix gaussian(jive::Index rows, jive::Index cols, std::uint64_t seed,
                             std::uint64_t stream = 0) {
  jive::RandomStream rng(seed, stream);
  jive::Matrix m(rows, cols);
  for (jive::Index i = 0; i < rows; ++i) {
    for (jive::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

// Largest |entry| of m^T m - I.
inline double orthonormality_error(const jive::Matrix& columns) {
  const jive::Matrix g = columns.transpose() * columns;
  return (g - jive::Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

}  // namespace testing
