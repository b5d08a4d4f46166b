#pragma once

#include "jive/linalg.hpp"
#include "jive/random.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace jive {

enum class ProjectionStatistic { mean_difference, t_statistic };

struct DiProPermConfig {
  Index n_perm = 1000;
  bool balanced = true;
  Index batches = 10;
  std::uint64_t seed = 1;
  ProjectionStatistic statistic = ProjectionStatistic::mean_difference;
  unsigned threads = 1;
};

struct DiProPermResult {
  double observed_stat = 0.0;
  std::vector<double> null_stats;
  double z_score = 0.0;
  std::pair<double, double> z_interval{0.0, 0.0};
  double empirical_pvalue = 1.0;
  Vector direction;
  std::size_t retries = 0;
};

/// Normalized difference of class means (class 1 minus class 0). Labels are 0/1.
Vector mean_diff_direction(const Matrix& x, std::span<const int> labels);

/// Statistic of the projections x^T direction for the two classes.
double projection_statistic(const Matrix& x, std::span<const int> labels, const VectorRef& direction,
                            ProjectionStatistic statistic);

/// Relabeling with the original class sizes. Balanced draws keep each new class
/// a proportional mix of both original classes.
std::vector<int> permute_labels(std::span<const int> labels, bool balanced, RandomStream& rng);

DiProPermResult diproperm_test(const Matrix& x, std::span<const int> labels,
                               const DiProPermConfig& config);

}  // namespace jive
