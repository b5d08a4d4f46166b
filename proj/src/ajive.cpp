#include "jive/ajive.hpp"

#include "ajive_internal.hpp"
#include "jive/errors.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <unordered_map>

namespace jive {

namespace {

std::vector<std::string> numbered(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

DataBlock::DataBlock(std::string name, Matrix matrix, std::vector<std::string> feature_names,
                     std::vector<std::string> case_ids, bool centered)
    : name_(std::move(name)),
      matrix_(std::move(matrix)),
      feature_names_(std::move(feature_names)),
      case_ids_(std::move(case_ids)),
      centered_(centered) {
  require_valid(matrix_, "block '" + name_ + "'");
  if (static_cast<Index>(feature_names_.size()) != matrix_.rows()) {
    throw InputError("block '" + name_ + "': " + std::to_string(feature_names_.size()) +
                     " feature names for " + std::to_string(matrix_.rows()) + " rows");
  }
  if (static_cast<Index>(case_ids_.size()) != matrix_.cols()) {
    throw InputError("block '" + name_ + "': " + std::to_string(case_ids_.size()) +
                     " case ids for " + std::to_string(matrix_.cols()) + " columns");
  }
}

DataBlock DataBlock::unlabeled(std::string name, Matrix matrix) {
  const Index rows = matrix.rows();
  const Index cols = matrix.cols();
  return DataBlock(std::move(name), std::move(matrix), numbered("f", rows), numbered("c", cols),
                   false);
}

DataBlock DataBlock::with_matrix(Matrix matrix, bool centered) const {
  if (matrix.rows() != matrix_.rows() || matrix.cols() != matrix_.cols()) {
    throw InputError("block '" + name_ + "': replacement matrix has a different shape");
  }
  return DataBlock(name_, std::move(matrix), feature_names_, case_ids_, centered);
}

DataBlock DataBlock::centered_copy() const { return with_matrix(center_rows(matrix_), true); }

double auto_joint_threshold(Index n_blocks) {
  return 1.0 + static_cast<double>(n_blocks - 1) / 2.0;
}

Index auto_joint_rank(const Vector& stacked_singular_values, Index n_blocks) {
  const double threshold = auto_joint_threshold(n_blocks);
  Index rank = 0;
  for (Index i = 0; i < stacked_singular_values.size(); ++i) {
    if (stacked_singular_values(i) * stacked_singular_values(i) > threshold) ++rank;
  }
  return rank;
}

std::vector<Index> individual_ranks(std::span<const Index> initial_ranks, Index joint_rank) {
  if (initial_ranks.empty()) throw InputError("no initial ranks given");
  const Index min_rank = *std::min_element(initial_ranks.begin(), initial_ranks.end());
  if (joint_rank < 1 || joint_rank > min_rank) {
    throw InputError("joint rank " + std::to_string(joint_rank) + " outside [1, " +
                     std::to_string(min_rank) + "] (smallest initial rank)");
  }
  std::vector<Index> out;
  out.reserve(initial_ranks.size());
  for (Index r : initial_ranks) out.push_back(r - joint_rank);
  return out;
}

namespace detail {

// Only the row space matters here, so the eigenvectors of the smaller Gram
// matrix suffice. Falls back to a full SVD when the trailing singular value is
// tiny relative to the leading one, where squaring would lose accuracy.
Matrix block_basis(const Matrix& data, Index initial_rank) {
  const Index d = data.rows();
  const Index n = data.cols();
  const Index small = std::min(d, n);
  Matrix gram = Matrix::Zero(small, small);
  if (d <= n) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(data);
  } else {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(data.transpose());
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector values = eig.eigenvalues().tail(initial_rank);  // ascending
  if (!(values(0) > 1e-8 * values(initial_rank - 1))) {
    return truncated_svd(data, initial_rank).right.transpose();
  }
  Matrix right = eig.eigenvectors().rightCols(initial_rank);
  if (d <= n) right = data.transpose() * right;
  const Eigen::HouseholderQR<Matrix> qr(right);
  return (qr.householderQ() * Matrix::Identity(n, initial_rank)).transpose();
}

PreparedBlock prepare_block(const DataBlock& block, Index initial_rank, bool normalize) {
  const Index max_rank = std::min(block.features(), block.cases());
  if (initial_rank < 1 || initial_rank > max_rank) {
    throw InputError("block '" + block.name() + "': initial rank " + std::to_string(initial_rank) +
                     " outside [1, " + std::to_string(max_rank) + "]");
  }
  PreparedBlock out;
  out.name = block.name();
  if (is_row_centered(block.matrix())) {
    out.data = block.matrix();
  } else {
    out.data = center_rows(block.matrix());
    out.centered_on_entry = true;
  }
  if (normalize) {
    const double norm = out.data.norm();
    if (!(norm > 0.0)) throw InputError("block '" + block.name() + "': zero matrix");
    out.scale = 1.0 / norm;
    out.data *= out.scale;
  }
  out.basis = block_basis(out.data, initial_rank);
  return out;
}

JointFit fit_joint(std::span<const Matrix> bases, std::optional<Index> joint_rank) {
  Index stacked_rows = 0;
  Index min_rank = bases.front().rows();
  for (const auto& b : bases) {
    stacked_rows += b.rows();
    min_rank = std::min(min_rank, b.rows());
  }
  const Index n = bases.front().cols();
  Matrix stacked(stacked_rows, n);
  Index row = 0;
  for (const auto& b : bases) {
    stacked.middleRows(row, b.rows()) = b;
    row += b.rows();
  }

  SvdFactors svd = truncated_svd(stacked, std::min(stacked_rows, n));
  JointFit out;
  out.stacked_singular_values = svd.singular_values;
  if (joint_rank) {
    out.joint_rank = *joint_rank;
  } else {
    out.joint_rank = std::min(auto_joint_rank(svd.singular_values, static_cast<Index>(bases.size())),
                              min_rank);
    if (out.joint_rank == 0) {
      throw InputError("automatic joint rank: no stacked singular value exceeds the threshold");
    }
  }
  if (out.joint_rank < 1 || out.joint_rank > min_rank) {
    throw InputError("joint rank " + std::to_string(out.joint_rank) + " outside [1, " +
                     std::to_string(min_rank) + "] (smallest initial rank)");
  }
  out.cns = svd.right.leftCols(out.joint_rank).transpose();
  return out;
}

BlockDecomposition split_block(const PreparedBlock& block, const Matrix& cns, Index initial_rank) {
  BlockDecomposition out;
  out.name = block.name;
  out.initial_rank = initial_rank;
  out.individual_rank = initial_rank - cns.rows();
  out.centered_on_entry = block.centered_on_entry;
  out.scale = block.scale;

  out.joint = (block.data * cns.transpose()) * cns;
  const Index n = block.data.cols();
  if (out.individual_rank > 0) {
    SvdFactors svd = truncated_svd(block.data - out.joint, out.individual_rank);
    out.individual = svd.reconstruct();
    out.bss = svd.right.transpose();
  } else {
    out.individual = Matrix::Zero(block.data.rows(), n);
    out.bss = Matrix(0, n);
  }
  return out;
}

}  // namespace detail

AjiveDecomposition ajive_decompose(std::span<const DataBlock> blocks, const AjiveOptions& options) {
  if (blocks.size() < 2) throw InputError("ajive: need at least two blocks");
  if (options.initial_ranks.size() != blocks.size()) {
    throw InputError("ajive: " + std::to_string(options.initial_ranks.size()) +
                     " initial ranks for " + std::to_string(blocks.size()) + " blocks");
  }
  for (std::size_t m = 1; m < blocks.size(); ++m) {
    if (blocks[m].case_ids() != blocks[0].case_ids()) {
      throw InputError("ajive: block '" + blocks[m].name() + "' has different case ids from '" +
                       blocks[0].name() + "'");
    }
  }
  if (options.joint_rank) {
    individual_ranks(options.initial_ranks, *options.joint_rank);
  }

  std::vector<detail::PreparedBlock> prepared;
  prepared.reserve(blocks.size());
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    prepared.push_back(
        detail::prepare_block(blocks[m], options.initial_ranks[m], options.normalize_blocks));
  }

  std::vector<Matrix> bases;
  bases.reserve(prepared.size());
  for (const auto& p : prepared) bases.push_back(p.basis);
  detail::JointFit joint = detail::fit_joint(bases, options.joint_rank);

  AjiveDecomposition out;
  out.joint_rank = joint.joint_rank;
  out.stacked_singular_values = std::move(joint.stacked_singular_values);
  out.cns = std::move(joint.cns);
  out.blocks.reserve(blocks.size());
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    out.blocks.push_back(detail::split_block(prepared[m], out.cns, options.initial_ranks[m]));
  }
  return out;
}

DataBlock build_indicator_block(std::span<const std::string> labels,
                                std::span<const std::string> class_order, std::string name,
                                std::vector<std::string> case_ids) {
  if (class_order.size() < 2) throw InputError("indicator block: need at least two classes");
  std::unordered_map<std::string, Index> row_of;
  for (std::size_t i = 0; i < class_order.size(); ++i) {
    if (!row_of.emplace(class_order[i], static_cast<Index>(i)).second) {
      throw InputError("indicator block: duplicate class '" + class_order[i] + "'");
    }
  }
  if (labels.empty()) throw InputError("indicator block: no labels");

  const auto n = static_cast<Index>(labels.size());
  Matrix m = Matrix::Zero(static_cast<Index>(class_order.size()), n);
  std::set<Index> present;
  for (Index j = 0; j < n; ++j) {
    const auto it = row_of.find(labels[static_cast<std::size_t>(j)]);
    if (it == row_of.end()) {
      throw InputError("indicator block: unknown label '" + labels[static_cast<std::size_t>(j)] + "'");
    }
    m(it->second, j) = 1.0;
    present.insert(it->second);
  }
  if (present.size() < 2) {
    throw InputError("indicator block: only one class present, block would be zero after centering");
  }
  if (case_ids.empty()) case_ids = numbered("c", n);
  return DataBlock(std::move(name), std::move(m),
                   std::vector<std::string>(class_order.begin(), class_order.end()),
                   std::move(case_ids), false);
}

Vector select_scores(const AjiveDecomposition& dec, Space space, std::optional<Index> block,
                     Index component) {
  return select_score_matrix(dec, space, block, component).col(0);
}

Matrix select_score_matrix(const AjiveDecomposition& dec, Space space, std::optional<Index> block,
                           std::optional<Index> component) {
  const Matrix* rows = &dec.cns;
  if (space == Space::individual) {
    if (!block || *block < 0 || *block >= static_cast<Index>(dec.blocks.size())) {
      throw InputError("individual scores need a block index in [0, " +
                       std::to_string(dec.blocks.size()) + ")");
    }
    rows = &dec.blocks[static_cast<std::size_t>(*block)].bss;
  } else if (block && (*block < 0 || *block >= static_cast<Index>(dec.blocks.size()))) {
    throw InputError("block index " + std::to_string(*block) + " out of range");
  }
  if (rows->rows() == 0) {
    throw InputError("requested space has rank 0");
  }
  if (!component) return rows->transpose();
  if (*component < 0 || *component >= rows->rows()) {
    throw InputError("component " + std::to_string(*component) + " outside [0, " +
                     std::to_string(rows->rows()) + ")");
  }
  return rows->row(*component).transpose();
}

}  // namespace jive
