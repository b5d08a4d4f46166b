#pragma once

#include "jive/ajive.hpp"

#include <span>
#include <vector>

namespace jive::detail {

/// A block after entry processing (centering, optional scaling) with its
/// normalized row basis from the initial low-rank step.
struct PreparedBlock {
  std::string name;
  Matrix data;   // d_m x n, row-centered
  Matrix basis;  // r_m x n, orthonormal rows
  bool centered_on_entry = false;
  double scale = 1.0;
};

PreparedBlock prepare_block(const DataBlock& block, Index initial_rank, bool normalize);

/// Recomputes only the low-rank basis of an already prepared block.
Matrix block_basis(const Matrix& data, Index initial_rank);

/// CNS (and stacked singular values) from prepared bases.
struct JointFit {
  Matrix cns;
  Vector stacked_singular_values;
  Index joint_rank = 0;
};

/// `bases` holds one r_m x n orthonormal-row basis per block.
JointFit fit_joint(std::span<const Matrix> bases, std::optional<Index> joint_rank);

/// Joint/individual parts of one block given the CNS.
BlockDecomposition split_block(const PreparedBlock& block, const Matrix& cns, Index initial_rank);

}  // namespace jive::detail
