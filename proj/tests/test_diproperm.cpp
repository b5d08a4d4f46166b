#include "doctest.h"
#include "support.hpp"

#include "jive/diproperm.hpp"
#include "jive/errors.hpp"
#include "jive/simulation.hpp"

#include <algorithm>
#include <cmath>

using namespace jive;

namespace {

std::vector<int> alternating(Index n) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) labels[static_cast<std::size_t>(j)] = static_cast<int>(j % 2);
  return labels;
}

}  // namespace

TEST_CASE("mean difference direction") {
  Matrix x = 0.01 * testing::gaussian(5, 40, 1);
  const auto labels = alternating(40);
  for (Index j = 0; j < 40; ++j) {
    if (labels[static_cast<std::size_t>(j)] == 1) x(0, j) += 10.0;
  }
  const Vector dir = mean_diff_direction(x, labels);
  CHECK(dir.norm() == doctest::Approx(1.0));
  CHECK(dir(0) > 0.0);
  CHECK(vector_angle(dir, Vector::Unit(5, 0)) < 1.0);

  const Matrix same = Matrix::Ones(3, 4);
  const std::vector<int> two = {0, 1, 0, 1};
  CHECK_THROWS_AS(mean_diff_direction(same, two), InputError);
  const std::vector<int> one_class = {1, 1, 1, 1};
  CHECK_THROWS_AS(mean_diff_direction(x.leftCols(4), one_class), InputError);
  const std::vector<int> bad = {0, 2, 0, 1};
  CHECK_THROWS_AS(mean_diff_direction(x.leftCols(4), bad), InputError);
}

TEST_CASE("toy joint loading lines up with the joint-sign split") {
  ToyConfig cfg;
  cfg.seed = 12;
  const ToyData toy = simulate_toy(cfg);
  std::vector<int> labels;
  for (Index j = 0; j < 160; ++j) labels.push_back(toy.truth.joint_scores(j) > 0 ? 1 : 0);
  const Vector dir = mean_diff_direction(toy.blocks[0].matrix(), labels);
  CHECK(vector_angle(dir, toy.truth.joint_loadings[0]) < 20.0);
}

TEST_CASE("projection statistics") {
  Matrix x(1, 6);
  x << 1, 2, 3, 10, 11, 12;
  const std::vector<int> labels = {0, 0, 0, 1, 1, 1};
  const Vector dir = Vector::Ones(1);
  CHECK(projection_statistic(x, labels, dir, ProjectionStatistic::mean_difference) ==
        doctest::Approx(9.0));
  // Both classes have variance 1: t = 9 / sqrt(1/3 + 1/3).
  CHECK(projection_statistic(x, labels, dir, ProjectionStatistic::t_statistic) ==
        doctest::Approx(9.0 / std::sqrt(2.0 / 3.0)));
}

TEST_CASE("balanced relabeling keeps class sizes and mixes both classes") {
  RandomStream rng(1);
  std::vector<int> labels(30, 0);
  std::fill(labels.begin(), labels.begin() + 10, 1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = permute_labels(labels, true, rng);
    int ones = 0;
    int kept = 0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      ones += p[j];
      kept += p[j] == 1 && labels[j] == 1 ? 1 : 0;
    }
    CHECK(ones == 10);
    // round(10 * 10 / 30) of the new class 1 come from the old class 1.
    CHECK(kept == 3);
  }
  const auto u = permute_labels(labels, false, rng);
  CHECK(std::count(u.begin(), u.end(), 1) == 10);
}

TEST_CASE("diproperm on separated and unseparated data") {
  DiProPermConfig cfg;
  cfg.n_perm = 400;

  SUBCASE("separated Gaussians") {
    Matrix x = testing::gaussian(100, 200, 3);
    std::vector<int> labels(200, 0);
    for (Index j = 100; j < 200; ++j) {
      labels[static_cast<std::size_t>(j)] = 1;
      x(0, j) += 5.0;
    }
    const DiProPermResult r = diproperm_test(x, labels, cfg);
    CHECK(r.z_score > 5.0);
    CHECK(r.empirical_pvalue == 0.0);
    CHECK(r.null_stats.size() == 400);
    CHECK(r.z_interval.first <= r.z_score);
    CHECK(r.z_interval.second >= r.z_score);
    CHECK(r.direction.norm() == doctest::Approx(1.0));
  }
  SUBCASE("random labels") {
    const Matrix x = testing::gaussian(50, 80, 4);
    const DiProPermResult r = diproperm_test(x, alternating(80), cfg);
    CHECK(std::abs(r.z_score) < 3.0);
    CHECK(r.z_interval.first <= r.z_score);
    CHECK(r.z_interval.second >= r.z_score);
  }
}

TEST_CASE("diproperm invariances and determinism") {
  const Matrix x = testing::gaussian(20, 60, 7);
  const auto labels = alternating(60);
  DiProPermConfig cfg;
  cfg.n_perm = 200;
  const DiProPermResult base = diproperm_test(x, labels, cfg);

  const Matrix shifted = x.colwise() + testing::gaussian(20, 1, 8).col(0);
  const DiProPermResult moved = diproperm_test(shifted, labels, cfg);
  CHECK(std::abs(moved.observed_stat - base.observed_stat) < 1e-8);

  const DiProPermResult scaled = diproperm_test(3.0 * x, labels, cfg);
  CHECK(scaled.observed_stat == doctest::Approx(3.0 * base.observed_stat));
  for (std::size_t i = 0; i < base.null_stats.size(); ++i) {
    CHECK(scaled.null_stats[i] == doctest::Approx(3.0 * base.null_stats[i]));
  }
  CHECK(std::abs(scaled.z_score - base.z_score) < 1e-6);

  const DiProPermResult again = diproperm_test(x, labels, cfg);
  CHECK(again.null_stats == base.null_stats);
  CHECK(again.z_score == base.z_score);
  DiProPermConfig threaded = cfg;
  threaded.threads = 3;
  CHECK(diproperm_test(x, labels, threaded).null_stats == base.null_stats);
}

TEST_CASE("diproperm preconditions") {
  const Matrix x = testing::gaussian(4, 10, 1);
  const auto labels = alternating(10);
  DiProPermConfig cfg;
  cfg.n_perm = 99;
  CHECK_THROWS_AS(diproperm_test(x, labels, cfg), InputError);
  cfg.n_perm = 100;
  std::vector<int> lonely(10, 0);
  lonely[0] = 1;
  CHECK_THROWS_AS(diproperm_test(x, lonely, cfg), InputError);
  CHECK_THROWS_AS(diproperm_test(x, alternating(9), cfg), InputError);
  cfg.batches = 1;
  CHECK_THROWS_AS(diproperm_test(x, labels, cfg), InputError);
}
