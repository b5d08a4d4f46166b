#include "jive/jackstraw.hpp"

#include "ajive_internal.hpp"
#include "jive/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace jive {

namespace {

constexpr double kPerfectFit = 1e-20;

/// Orthonormal basis of the predictor column space, used to evaluate many
/// responses against the same predictors.
class Projector {
 public:
  explicit Projector(const Matrix& predictors) {
    if (predictors.cols() < 1) throw InputError("predictor matrix has no columns");
    if (predictors.rows() <= predictors.cols()) {
      throw InputError("F statistic needs more cases than predictors");
    }
    if (!predictors.allFinite()) throw InputError("predictor matrix is not finite");
    Eigen::ColPivHouseholderQR<Matrix> qr(predictors);
    if (qr.rank() < predictors.cols()) {
      throw InputError("predictor matrix is rank deficient (singular V^T V)");
    }
    basis_ = qr.householderQ() * Matrix::Identity(predictors.rows(), predictors.cols());
  }

  Index cases() const { return basis_.rows(); }
  Index rank() const { return basis_.cols(); }

  double f(const VectorRef& y) const {
    const double sse0 = y.squaredNorm();
    if (sse0 == 0.0) return 0.0;
    const Vector coef = basis_.transpose() * y;
    const double sse1 = (y - basis_ * coef).squaredNorm();
    if (sse1 <= kPerfectFit * sse0) return std::numeric_limits<double>::infinity();
    const auto r = static_cast<double>(rank());
    const auto df = static_cast<double>(cases() - rank());
    return (coef.squaredNorm() / r) / (sse1 / df);
  }

 private:
  Matrix basis_;
};

void shuffle_row(Matrix& m, Index row, RandomStream& rng) {
  Vector values = m.row(row).transpose();
  rng.shuffle(values.data(), values.data() + values.size());
  m.row(row) = values.transpose();
}

void check_rows(std::span<const Index> rows, Index features) {
  std::set<Index> seen;
  for (Index r : rows) {
    if (r < 0 || r >= features) {
      throw InputError("row index " + std::to_string(r) + " out of range");
    }
    if (!seen.insert(r).second) {
      throw InputError("duplicate row index " + std::to_string(r));
    }
  }
}

struct AjiveSetup {
  std::vector<detail::PreparedBlock> prepared;
  std::vector<Matrix> bases;
  Index joint_rank = 0;
  Matrix predictors;
};

Matrix target_predictors(std::span<const Matrix> bases, const detail::PreparedBlock& target_block,
                         Index initial_rank, Index joint_rank, const JackstrawTarget& target) {
  const detail::JointFit joint = detail::fit_joint(bases, joint_rank);
  if (target.space == Space::joint) {
    if (!target.component) return joint.cns.transpose();
    return joint.cns.row(*target.component).transpose();
  }
  const BlockDecomposition split = detail::split_block(target_block, joint.cns, initial_rank);
  if (!target.component) return split.bss.transpose();
  return split.bss.row(*target.component).transpose();
}

AjiveSetup setup_ajive(std::span<const DataBlock> blocks, const JackstrawTarget& target,
                       const AjiveOptions& options) {
  const AjiveDecomposition dec = ajive_decompose(blocks, options);
  if (target.block < 0 || target.block >= static_cast<Index>(blocks.size())) {
    throw InputError("target block " + std::to_string(target.block) + " out of range");
  }
  AjiveSetup out;
  out.joint_rank = dec.joint_rank;
  out.predictors = select_score_matrix(dec, target.space, target.block, target.component);
  for (std::size_t m = 0; m < blocks.size(); ++m) {
    out.prepared.push_back(
        detail::prepare_block(blocks[m], options.initial_ranks[m], options.normalize_blocks));
    out.bases.push_back(out.prepared.back().basis);
  }
  return out;
}

PredictorRefit ajive_refit(const AjiveSetup& setup, const JackstrawTarget& target,
                           const AjiveOptions& options) {
  const auto block = static_cast<std::size_t>(target.block);
  const Index initial_rank = options.initial_ranks[block];
  return [&setup, target, block, initial_rank](const Matrix& permuted) {
    std::vector<Matrix> bases = setup.bases;
    bases[block] = detail::block_basis(permuted, initial_rank);
    detail::PreparedBlock target_block;
    target_block.data = permuted;
    return target_predictors(bases, target_block, initial_rank, setup.joint_rank, target);
  };
}

JackstrawResult assemble(const Matrix& target, std::vector<std::string> feature_names,
                         const Matrix& predictors, const PredictorRefit& refit,
                         const JackstrawConfig& config) {
  validate(config, target.rows());
  JackstrawResult out;
  out.config = config;
  out.feature_names = std::move(feature_names);
  out.predictor_rank = predictors.cols();

  const Projector projector(predictors);
  out.f_observed.resize(static_cast<std::size_t>(target.rows()));
  for (Index j = 0; j < target.rows(); ++j) {
    out.f_observed[static_cast<std::size_t>(j)] = projector.f(target.row(j).transpose());
  }
  out.f_null = permutation_null(target, predictors, refit, config);
  out.p_raw = empirical_pvalues(out.f_observed, out.f_null, config.smoothing);
  out.p_adjusted = adjust_pvalues(out.p_raw, config.adjustment);
  out.significant.resize(out.p_adjusted.size());
  for (std::size_t j = 0; j < out.p_adjusted.size(); ++j) {
    out.significant[j] = out.p_adjusted[j] <= config.alpha;
  }
  if (config.n_reps * config.k_rows < 10 * target.rows()) {
    out.warnings.push_back("S*K = " + std::to_string(config.n_reps * config.k_rows) +
                           " is below 10 * d_m = " + std::to_string(10 * target.rows()) +
                           "; the null distribution may be too coarse");
  }
  return out;
}

}  // namespace

void validate(const JackstrawConfig& config, Index features) {
  if (config.k_rows < 1) throw InputError("K must be at least 1");
  if (2 * config.k_rows > features) {
    throw InputError("K = " + std::to_string(config.k_rows) + " exceeds half the " +
                     std::to_string(features) + " features");
  }
  if (config.n_reps < 1) throw InputError("S must be at least 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (config.threads < 1) throw InputError("thread count must be at least 1");
}

std::size_t JackstrawResult::significant_count() const {
  return static_cast<std::size_t>(std::count(significant.begin(), significant.end(), true));
}

Vector loading_vector(const DataBlock& block, const VectorRef& scores) {
  if (scores.size() != block.cases()) {
    throw InputError("loading_vector: score length " + std::to_string(scores.size()) +
                     " does not match " + std::to_string(block.cases()) + " cases");
  }
  if (std::abs(scores.norm() - 1.0) > 1e-8) {
    throw InputError("loading_vector: score vector must have unit norm");
  }
  return block.matrix() * scores;
}

double f_statistic(const VectorRef& y, const Matrix& predictors) {
  if (predictors.rows() != y.size()) {
    throw InputError("f_statistic: response length does not match predictor rows");
  }
  if (!y.allFinite()) throw InputError("f_statistic: response is not finite");
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (std::abs(y.mean()) > 1e-8 * scale) {
    throw PreconditionError("f_statistic: response must be centered");
  }
  return Projector(predictors).f(y);
}

std::vector<double> observed_f(const DataBlock& block, const Matrix& predictors) {
  if (predictors.rows() != block.cases()) {
    throw InputError("observed_f: predictor rows do not match the block's cases");
  }
  if (!is_row_centered(block.matrix())) {
    throw PreconditionError("observed_f: block '" + block.name() + "' is not row-centered");
  }
  const Projector projector(predictors);
  std::vector<double> out(static_cast<std::size_t>(block.features()));
  for (Index j = 0; j < block.features(); ++j) {
    out[static_cast<std::size_t>(j)] = projector.f(block.matrix().row(j).transpose());
  }
  return out;
}

DataBlock permute_rows(const DataBlock& block, std::span<const Index> rows, RandomStream& rng) {
  check_rows(rows, block.features());
  Matrix m = block.matrix();
  for (Index r : rows) shuffle_row(m, r, rng);
  return block.with_matrix(std::move(m), block.centered());
}

std::vector<double> permutation_null(const Matrix& target, const Matrix& predictors,
                                     const PredictorRefit& refit, const JackstrawConfig& config) {
  validate(config, target.rows());
  if (config.mode == JackstrawMode::full && !refit) {
    throw InputError("full mode needs a predictor refit");
  }
  const Projector original(predictors);
  const Index k = config.k_rows;
  std::vector<double> out(static_cast<std::size_t>(config.n_reps * k));

  detail::parallel_for(config.n_reps, config.threads, [&](std::int64_t b) {
    RandomStream rng(config.seed, static_cast<std::uint64_t>(b));
    const auto rows = rng.sample_without_replacement(target.rows(), k);
    double* slot = out.data() + b * k;

    if (config.mode == JackstrawMode::approximate) {
      for (Index i = 0; i < k; ++i) {
        Vector y = target.row(rows[static_cast<std::size_t>(i)]).transpose();
        rng.shuffle(y.data(), y.data() + y.size());
        slot[i] = original.f(y);
      }
      return;
    }

    Matrix permuted = target;
    for (auto r : rows) shuffle_row(permuted, r, rng);
    try {
      const Projector refitted(refit(permuted));
      for (Index i = 0; i < k; ++i) {
        slot[i] = refitted.f(permuted.row(rows[static_cast<std::size_t>(i)]).transpose());
      }
    } catch (const std::exception& e) {
      throw ReplicateError(static_cast<std::size_t>(b), e.what());
    }
  });
  return out;
}

std::vector<double> null_samples(std::span<const DataBlock> blocks, const JackstrawTarget& target,
                                 const AjiveOptions& options, const JackstrawConfig& config) {
  const AjiveSetup setup = setup_ajive(blocks, target, options);
  const Matrix& data = setup.prepared[static_cast<std::size_t>(target.block)].data;
  return permutation_null(data, setup.predictors, ajive_refit(setup, target, options), config);
}

std::vector<double> empirical_pvalues(std::span<const double> f_observed,
                                      std::span<const double> f_null, bool smoothing) {
  if (f_null.empty()) throw InputError("empirical_pvalues: empty null sample");
  std::vector<double> sorted(f_null.begin(), f_null.end());
  std::sort(sorted.begin(), sorted.end());
  const auto total = static_cast<double>(sorted.size());

  std::vector<double> out;
  out.reserve(f_observed.size());
  for (double f : f_observed) {
    if (std::isinf(f) && f > 0) {
      out.push_back(0.0);
      continue;
    }
    // Null values with F_j <= F_null.
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), f);
    const auto count = static_cast<double>(sorted.end() - first);
    out.push_back(smoothing ? (1.0 + count) / (1.0 + total) : count / total);
  }
  return out;
}

std::vector<double> adjust_pvalues(std::span<const double> p, Adjustment method) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("adjust_pvalues: p-values must lie in [0, 1]");
  }
  std::vector<double> out(p.begin(), p.end());
  const auto d = static_cast<double>(p.size());
  switch (method) {
    case Adjustment::none:
      break;
    case Adjustment::bonferroni:
      for (double& v : out) v = std::min(1.0, v * d);
      break;
    case Adjustment::bh: {
      std::vector<std::size_t> order(p.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
      double running = 1.0;
      for (std::size_t i = order.size(); i-- > 0;) {
        const double candidate = p[order[i]] * d / static_cast<double>(i + 1);
        running = std::min(running, candidate);
        out[order[i]] = std::min(1.0, running);
      }
      break;
    }
  }
  return out;
}

JackstrawResult jackstraw_run(std::span<const DataBlock> blocks, const JackstrawTarget& target,
                              const AjiveOptions& options, const JackstrawConfig& config) {
  const AjiveSetup setup = setup_ajive(blocks, target, options);
  const auto block = static_cast<std::size_t>(target.block);
  JackstrawResult out =
      assemble(setup.prepared[block].data, blocks[block].feature_names(), setup.predictors,
               ajive_refit(setup, target, options), config);
  out.method = "ajive";
  out.target = target;
  return out;
}

JackstrawResult pca_jackstraw_run(const DataBlock& block, Index rank, Index component,
                                  const JackstrawConfig& config) {
  if (component < 0 || component >= rank) {
    throw InputError("PCA component " + std::to_string(component) + " outside [0, " +
                     std::to_string(rank) + ")");
  }
  const Matrix data = is_row_centered(block.matrix()) ? block.matrix() : center_rows(block.matrix());
  const Matrix predictors = truncated_svd(data, rank).right.col(component);
  PredictorRefit refit = [rank, component](const Matrix& permuted) -> Matrix {
    return truncated_svd(permuted, rank).right.col(component);
  };
  JackstrawResult out = assemble(data, block.feature_names(), predictors, refit, config);
  out.method = "pca";
  out.target = JackstrawTarget{Space::joint, 0, component};
  return out;
}

std::string to_string(JackstrawMode mode) {
  return mode == JackstrawMode::full ? "full" : "approximate";
}

std::string to_string(Adjustment adjustment) {
  switch (adjustment) {
    case Adjustment::bonferroni:
      return "bonferroni";
    case Adjustment::bh:
      return "bh";
    case Adjustment::none:
      return "none";
  }
  return "none";
}

std::string to_string(Space space) { return space == Space::joint ? "joint" : "individual"; }

JackstrawMode parse_mode(const std::string& text) {
  if (text == "full") return JackstrawMode::full;
  if (text == "approx" || text == "approximate") return JackstrawMode::approximate;
  throw InputError("unknown jackstraw mode '" + text + "' (expected full or approx)");
}

Adjustment parse_adjustment(const std::string& text) {
  if (text == "bonferroni") return Adjustment::bonferroni;
  if (text == "bh" || text == "fdr") return Adjustment::bh;
  if (text == "none") return Adjustment::none;
  throw InputError("unknown adjustment '" + text + "' (expected bonferroni, bh or none)");
}

Space parse_space(const std::string& text) {
  if (text == "joint") return Space::joint;
  if (text == "individual") return Space::individual;
  throw InputError("unknown space '" + text + "' (expected joint or individual)");
}

}  // namespace jive
