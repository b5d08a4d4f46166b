#pragma once

#include "jive/ajive.hpp"
#include "jive/jackstraw.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jive {

/// Inclusive, 1-based row range.
struct RowRange {
  Index first = 1;
  Index last = 1;

  Index size() const { return last - first + 1; }
  bool contains(Index row1) const { return row1 >= first && row1 <= last; }
};

/// Two-block toy example: a rank-1 joint signal shared by both blocks, a rank-1
/// individual signal per block, and Gaussian noise.
///
/// Case patterns are odd powers of low-frequency waves on the case grid
/// t_i = (i + 1/2) / n, scaled to a maximum magnitude of 1:
///   joint        sin(2 pi t)   (+ on the first half, - on the second)
///   individual 1 sin(4 pi t)   (+ - + - by quarters)
///   individual 2 cos(2 pi t)   (+ - - + by quarters)
/// Each pattern is sign(x) |x|^shape of its wave; any shape keeps the three
/// patterns exactly orthogonal and zero-mean.
struct ToyConfig {
  std::array<Index, 2> features = {120, 120};
  Index cases = 160;
  double joint_amplitude = 0.7;
  double individual_amplitude = 1.0;
  double noise_variance = 2.0;
  std::array<RowRange, 2> joint_support = {RowRange{1, 80}, RowRange{1, 40}};
  std::array<RowRange, 2> individual_support = {RowRange{81, 120}, RowRange{41, 120}};
  double joint_shape = 0.8;
  std::array<double, 2> individual_shape = {0.88, 2.5};
  std::uint64_t seed = 1;
};

void validate(const ToyConfig& config);

/// Case pattern with maximum magnitude 1. `harmonic` selects sin(2 pi k t) for
/// k > 0 and cos(2 pi |k| t) for k < 0.
Vector case_pattern(Index cases, int harmonic, double shape);

struct ToyGroundTruth {
  Vector joint_scores;                      // unit norm
  std::array<Vector, 2> individual_scores;  // unit norm
  std::array<Vector, 2> joint_loadings;     // 0/1 support indicators
  std::array<Vector, 2> individual_loadings;
  std::array<std::vector<bool>, 2> joint_mask;
  std::array<std::vector<bool>, 2> individual_mask;
};

struct ToyData {
  std::array<DataBlock, 2> blocks;  // row-centered
  ToyGroundTruth truth;
  std::array<Matrix, 2> joint_signal;
  std::array<Matrix, 2> individual_signal;
  std::array<Matrix, 2> noise;
};

ToyData simulate_toy(const ToyConfig& config);

/// Fraction of features on which the two masks agree.
double accuracy(const std::vector<bool>& significant, const std::vector<bool>& truth);

/// Fraction of truly significant features that were detected (1 when none are).
double true_positive_rate(const std::vector<bool>& significant, const std::vector<bool>& truth);

struct Pairing {
  std::vector<Index> truth_for_estimate;  // estimate i pairs with truth truth_for_estimate[i]
  double total_angle = 0.0;
};

/// Exhaustive assignment minimizing the summed loading angles.
Pairing pair_components(std::span<const Vector> estimated, std::span<const Vector> truth);

/// Column order of the comparison tables.
inline const std::array<std::string, 4> kComparisonColumns = {
    "D1.(joint/PC2)", "D1.(indivi/PC1)", "D2.(joint/PC2)", "D2.(indivi/PC1)"};

struct ComparisonTables {
  std::array<double, 4> ajive_accuracy{};
  std::array<double, 4> pca_accuracy{};
  std::array<double, 4> ajive_angle{};
  std::array<double, 4> pca_angle{};
  std::array<double, 4> ajive_tpr{};
  std::array<double, 4> pca_tpr{};
  std::array<std::size_t, 4> ajive_significant{};
  std::array<std::size_t, 4> pca_significant{};
  /// PCA component (0-based) used for each column.
  std::array<Index, 4> pca_component{};
};

/// AJIVE-jackstraw vs PCA-jackstraw on one toy draw.
ComparisonTables compare_methods(const ToyConfig& config, const JackstrawConfig& jconfig);

/// Elementwise median over replicate tables (PCA component indices are taken
/// from the first table).
ComparisonTables median_tables(std::span<const ComparisonTables> tables);

double median(std::vector<double> values);

}  // namespace jive
