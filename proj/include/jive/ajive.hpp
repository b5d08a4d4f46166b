#pragma once

#include "jive/linalg.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jive {

/// A feature-by-case data matrix with its row and column labels.
class DataBlock {
 public:
  DataBlock(std::string name, Matrix matrix, std::vector<std::string> feature_names,
            std::vector<std::string> case_ids, bool centered = false);

  /// Block with generated labels ("f1".., "c1"..).
  static DataBlock unlabeled(std::string name, Matrix matrix);

  const std::string& name() const { return name_; }
  const Matrix& matrix() const { return matrix_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& case_ids() const { return case_ids_; }
  bool centered() const { return centered_; }

  Index features() const { return matrix_.rows(); }
  Index cases() const { return matrix_.cols(); }

  /// Same labels, new values. The new matrix must have the same shape.
  DataBlock with_matrix(Matrix matrix, bool centered) const;

  /// Row-centered copy (flagged centered).
  DataBlock centered_copy() const;

 private:
  std::string name_;
  Matrix matrix_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> case_ids_;
  bool centered_;
};

enum class Space { joint, individual };

struct AjiveOptions {
  std::vector<Index> initial_ranks;
  /// nullopt selects the joint rank from the stacked singular values.
  std::optional<Index> joint_rank;
  /// Divide each block by its Frobenius norm before decomposing.
  bool normalize_blocks = false;
};

struct BlockDecomposition {
  std::string name;
  Matrix joint;       // d_m x n
  Matrix individual;  // d_m x n
  Matrix bss;         // r_I x n, orthonormal rows (0 rows when r_I = 0)
  Index initial_rank = 0;
  Index individual_rank = 0;
  /// True when the block arrived uncentered and was centered on entry.
  bool centered_on_entry = false;
  /// Factor applied to the block before decomposition (1 unless normalized).
  double scale = 1.0;
};

struct AjiveDecomposition {
  Matrix cns;  // r_J x n, orthonormal rows
  std::vector<BlockDecomposition> blocks;
  Index joint_rank = 0;
  Vector stacked_singular_values;
};

/// Threshold on squared stacked singular values used by automatic joint rank
/// selection: halfway between no association (1) and full association (M).
double auto_joint_threshold(Index n_blocks);

Index auto_joint_rank(const Vector& stacked_singular_values, Index n_blocks);

/// Individual rank for each block, r_m - r_J. Throws if r_J > min r_m.
std::vector<Index> individual_ranks(std::span<const Index> initial_ranks, Index joint_rank);

/// AJIVE joint/individual decomposition of blocks sharing the same cases.
AjiveDecomposition ajive_decompose(std::span<const DataBlock> blocks, const AjiveOptions& options);

/// One-hot class-membership block, #classes x n, not centered.
DataBlock build_indicator_block(std::span<const std::string> labels,
                                std::span<const std::string> class_order,
                                std::string name = "indicator",
                                std::vector<std::string> case_ids = {});

/// Unit-norm score vector (length n): a CNS row for the joint space, or a BSS
/// row of `block` for the individual space.
Vector select_scores(const AjiveDecomposition& dec, Space space, std::optional<Index> block,
                     Index component);

/// Predictor matrix (n x r): one score column, or every component of the space
/// when `component` is nullopt.
Matrix select_score_matrix(const AjiveDecomposition& dec, Space space, std::optional<Index> block,
                           std::optional<Index> component);

}  // namespace jive
