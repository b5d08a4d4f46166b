#include "jive/diproperm.hpp"

#include "jive/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

namespace jive {

namespace {

struct ClassCounts {
  Index zero = 0;
  Index one = 0;
};

ClassCounts count_classes(std::span<const int> labels) {
  ClassCounts c;
  for (int l : labels) {
    if (l == 0) {
      ++c.zero;
    } else if (l == 1) {
      ++c.one;
    } else {
      throw InputError("labels must be 0 or 1, got " + std::to_string(l));
    }
  }
  return c;
}

// Mean difference (class 1 minus class 0) without normalization.
Vector raw_mean_difference(const Matrix& x, std::span<const int> labels) {
  Vector sum1 = Vector::Zero(x.rows());
  Vector sum0 = Vector::Zero(x.rows());
  Index n1 = 0;
  for (Index j = 0; j < x.cols(); ++j) {
    if (labels[static_cast<std::size_t>(j)] == 1) {
      sum1 += x.col(j);
      ++n1;
    } else {
      sum0 += x.col(j);
    }
  }
  const Index n0 = x.cols() - n1;
  return sum1 / static_cast<double>(n1) - sum0 / static_cast<double>(n0);
}

double mean_and_var(const std::vector<double>& v, double& var) {
  const auto n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  var = ss / (n - 1.0);
  return mean;
}

double zscore(double observed, const std::vector<double>& null) {
  double var = 0.0;
  const double mean = mean_and_var(null, var);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw std::runtime_error("diproperm: null statistics have zero spread");
  return (observed - mean) / sd;
}

}  // namespace

Vector mean_diff_direction(const Matrix& x, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != x.cols()) {
    throw InputError("diproperm: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(x.cols()) + " cases");
  }
  const ClassCounts c = count_classes(labels);
  if (c.zero == 0 || c.one == 0) throw InputError("diproperm: both classes must be non-empty");
  const Vector diff = raw_mean_difference(x, labels);
  const double norm = diff.norm();
  if (!(norm > 0.0)) throw InputError("diproperm: class means coincide");
  return diff / norm;
}

double projection_statistic(const Matrix& x, std::span<const int> labels, const VectorRef& direction,
                            ProjectionStatistic statistic) {
  const Vector proj = x.transpose() * direction;
  std::vector<double> a;
  std::vector<double> b;
  for (Index j = 0; j < proj.size(); ++j) {
    (labels[static_cast<std::size_t>(j)] == 1 ? a : b).push_back(proj(j));
  }
  if (a.empty() || b.empty()) throw InputError("diproperm: both classes must be non-empty");
  double va = 0.0;
  double vb = 0.0;
  if (statistic == ProjectionStatistic::mean_difference) {
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    return ma - mb;
  }
  if (a.size() < 2 || b.size() < 2) throw InputError("diproperm: t statistic needs two cases per class");
  const double ma = mean_and_var(a, va);
  const double mb = mean_and_var(b, vb);
  const double se = std::sqrt(va / static_cast<double>(a.size()) + vb / static_cast<double>(b.size()));
  if (!(se > 0.0)) throw std::runtime_error("diproperm: projected classes have zero spread");
  return (ma - mb) / se;
}

std::vector<int> permute_labels(std::span<const int> labels, bool balanced, RandomStream& rng) {
  const ClassCounts c = count_classes(labels);
  const auto n = static_cast<Index>(labels.size());
  if (!balanced) {
    std::vector<int> out(labels.begin(), labels.end());
    rng.shuffle(out.begin(), out.end());
    return out;
  }

  // New class 1 takes round(n1 * n1 / n) cases of old class 1 and fills the
  // rest from old class 0, so each new class mixes both in proportion.
  std::vector<Index> ones;
  std::vector<Index> zeros;
  for (Index j = 0; j < n; ++j) (labels[static_cast<std::size_t>(j)] == 1 ? ones : zeros).push_back(j);
  const Index from_ones = std::clamp<Index>(
      static_cast<Index>(std::llround(static_cast<double>(c.one) * static_cast<double>(c.one) /
                                      static_cast<double>(n))),
      c.one - c.zero > 0 ? c.one - c.zero : 0, c.one);
  const Index from_zeros = c.one - from_ones;

  std::vector<int> out(static_cast<std::size_t>(n), 0);
  rng.shuffle(ones.begin(), ones.end());
  rng.shuffle(zeros.begin(), zeros.end());
  for (Index i = 0; i < from_ones; ++i) out[static_cast<std::size_t>(ones[static_cast<std::size_t>(i)])] = 1;
  for (Index i = 0; i < from_zeros; ++i) out[static_cast<std::size_t>(zeros[static_cast<std::size_t>(i)])] = 1;
  return out;
}

DiProPermResult diproperm_test(const Matrix& x, std::span<const int> labels,
                               const DiProPermConfig& config) {
  require_valid(x, "diproperm data");
  if (config.n_perm < 100) throw InputError("diproperm: n_perm must be at least 100");
  if (config.batches < 2 || config.batches > config.n_perm / 2) {
    throw InputError("diproperm: batches must lie in [2, n_perm / 2]");
  }
  if (config.threads < 1) throw InputError("diproperm: threads must be at least 1");
  if (static_cast<Index>(labels.size()) != x.cols()) {
    throw InputError("diproperm: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(x.cols()) + " cases");
  }
  const ClassCounts c = count_classes(labels);
  if (c.zero < 2 || c.one < 2) throw InputError("diproperm: each class needs at least two cases");

  DiProPermResult out;
  out.direction = mean_diff_direction(x, labels);
  out.observed_stat = projection_statistic(x, labels, out.direction, config.statistic);

  const auto n_perm = static_cast<std::size_t>(config.n_perm);
  const auto retry_limit = 10 * n_perm;
  out.null_stats.assign(n_perm, 0.0);
  std::atomic<std::size_t> retries{0};
  detail::parallel_for(config.n_perm, config.threads, [&](std::int64_t p) {
    RandomStream rng(config.seed, static_cast<std::uint64_t>(p) + 1);
    for (;;) {
      const std::vector<int> perm = permute_labels(labels, config.balanced, rng);
      const Vector diff = raw_mean_difference(x, perm);
      const double norm = diff.norm();
      if (norm > 0.0 && std::isfinite(norm)) {
        const Vector dir = diff / norm;
        out.null_stats[static_cast<std::size_t>(p)] =
            projection_statistic(x, perm, dir, config.statistic);
        return;
      }
      if (retries.fetch_add(1) + 1 > retry_limit) {
        throw std::runtime_error("diproperm: too many degenerate permutations");
      }
    }
  });
  out.retries = retries.load();

  out.z_score = zscore(out.observed_stat, out.null_stats);

  const std::size_t per_batch = n_perm / static_cast<std::size_t>(config.batches);
  std::vector<double> batch_z;
  for (std::size_t b = 0; b < static_cast<std::size_t>(config.batches); ++b) {
    const auto first = out.null_stats.begin() + static_cast<std::ptrdiff_t>(b * per_batch);
    batch_z.push_back(zscore(out.observed_stat,
                             std::vector<double>(first, first + static_cast<std::ptrdiff_t>(per_batch))));
  }
  double var = 0.0;
  mean_and_var(batch_z, var);
  const double half = 2.0 * std::sqrt(var);
  out.z_interval = {out.z_score - half, out.z_score + half};

  const auto exceed = std::count_if(out.null_stats.begin(), out.null_stats.end(),
                                    [&](double s) { return s >= out.observed_stat; });
  out.empirical_pvalue = static_cast<double>(exceed) / static_cast<double>(n_perm);
  return out;
}

}  // namespace jive
