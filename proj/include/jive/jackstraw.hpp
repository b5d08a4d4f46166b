#pragma once

#include "jive/ajive.hpp"
#include "jive/linalg.hpp"
#include "jive/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jive {

enum class JackstrawMode { full, approximate };
enum class Adjustment { bonferroni, bh, none };

struct JackstrawConfig {
  Index k_rows = 1;    // rows permuted per replicate
  Index n_reps = 1000; // replicates
  JackstrawMode mode = JackstrawMode::approximate;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  Adjustment adjustment = Adjustment::bonferroni;
  bool smoothing = false;
  unsigned threads = 1;
};

/// Throws InputError if the configuration cannot be used on a block with
/// `features` rows.
void validate(const JackstrawConfig& config, Index features);

/// Which loadings are tested: a single component, or the whole space when
/// `component` is empty. `block` is the block whose rows are the responses.
struct JackstrawTarget {
  Space space = Space::joint;
  Index block = 0;
  std::optional<Index> component = 0;
};

struct JackstrawResult {
  std::vector<double> f_observed;
  std::vector<double> f_null;
  std::vector<double> p_raw;
  std::vector<double> p_adjusted;
  std::vector<bool> significant;
  std::vector<std::string> feature_names;
  std::string method = "ajive";  // "ajive" or "pca"
  JackstrawTarget target;
  JackstrawConfig config;
  /// Columns of the predictor (1 for a single component).
  Index predictor_rank = 1;
  std::vector<std::string> warnings;

  std::size_t significant_count() const;
};

/// L = D v.
Vector loading_vector(const DataBlock& block, const VectorRef& scores);

/// F statistic for regressing the centered response `y` on the columns of
/// `predictors` (n x r) without intercept:
///   F = ((SSE0 - SSE1) / r) / (SSE1 / (n - r)).
/// A perfect fit (SSE1 = 0) returns +infinity; an all-zero response returns 0.
double f_statistic(const VectorRef& y, const Matrix& predictors);

/// f_statistic for every row of the block.
std::vector<double> observed_f(const DataBlock& block, const Matrix& predictors);

/// Copy of the block with each listed row shuffled independently across cases.
DataBlock permute_rows(const DataBlock& block, std::span<const Index> rows, RandomStream& rng);

/// Recomputes the predictor after the target matrix has been permuted. Used
/// by full mode; approximate mode keeps the original predictor.
using PredictorRefit = std::function<Matrix(const Matrix& permuted_target)>;

/// Pooled S*K null statistics. Replicate b draws from RandomStream(seed, b), so
/// the output does not depend on the thread count.
std::vector<double> permutation_null(const Matrix& target, const Matrix& predictors,
                                     const PredictorRefit& refit, const JackstrawConfig& config);

/// Null statistics for a jackstraw test of AJIVE loadings.
std::vector<double> null_samples(std::span<const DataBlock> blocks, const JackstrawTarget& target,
                                 const AjiveOptions& options, const JackstrawConfig& config);

/// p_j = #{b : F_j <= F_null_b} / B, or (1 + count) / (1 + B) when smoothing.
/// Infinite F_j maps to p = 0.
std::vector<double> empirical_pvalues(std::span<const double> f_observed,
                                      std::span<const double> f_null, bool smoothing);

std::vector<double> adjust_pvalues(std::span<const double> p, Adjustment method);

/// Observed F, null, p-values, adjustment and thresholding for AJIVE loadings.
JackstrawResult jackstraw_run(std::span<const DataBlock> blocks, const JackstrawTarget& target,
                              const AjiveOptions& options, const JackstrawConfig& config);

/// The same test for PCA loadings of a single block (rank-`rank` PCA, one
/// component). Full mode recomputes the PCA for each replicate.
JackstrawResult pca_jackstraw_run(const DataBlock& block, Index rank, Index component,
                                  const JackstrawConfig& config);

std::string to_string(JackstrawMode mode);
std::string to_string(Adjustment adjustment);
std::string to_string(Space space);
JackstrawMode parse_mode(const std::string& text);
Adjustment parse_adjustment(const std::string& text);
Space parse_space(const std::string& text);

}  // namespace jive
