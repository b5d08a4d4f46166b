#include "jive/simulation.hpp"

#include "jive/errors.hpp"
#include "jive/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace jive {

namespace {

Vector support_indicator(Index features, const RowRange& range) {
  Vector v = Vector::Zero(features);
  v.segment(range.first - 1, range.size()).setOnes();
  return v;
}

std::vector<bool> to_mask(const Vector& indicator) {
  std::vector<bool> out(static_cast<std::size_t>(indicator.size()));
  for (Index i = 0; i < indicator.size(); ++i) out[static_cast<std::size_t>(i)] = indicator(i) != 0.0;
  return out;
}

Matrix gaussian_noise(Index rows, Index cols, double variance, RandomStream& rng) {
  Matrix e(rows, cols);
  const double sd = std::sqrt(variance);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) e(i, j) = sd * rng.normal();
  }
  return e;
}

}  // namespace

void validate(const ToyConfig& config) {
  if (config.cases < 4 || config.cases % 2 != 0) {
    throw InputError("toy: case count must be even and at least 4");
  }
  if (!(config.joint_amplitude >= 0.0) || !(config.individual_amplitude >= 0.0)) {
    throw InputError("toy: amplitudes must be non-negative");
  }
  if (!(config.noise_variance >= 0.0) || !std::isfinite(config.noise_variance)) {
    throw InputError("toy: noise variance must be non-negative");
  }
  if (!(config.joint_shape > 0.0) || !(config.individual_shape[0] > 0.0) ||
      !(config.individual_shape[1] > 0.0)) {
    throw InputError("toy: pattern shapes must be positive");
  }
  for (std::size_t m = 0; m < 2; ++m) {
    const Index d = config.features[m];
    if (d < 2) throw InputError("toy: each block needs at least two features");
    for (const RowRange* r : {&config.joint_support[m], &config.individual_support[m]}) {
      if (r->first < 1 || r->last > d || r->first > r->last) {
        throw InputError("toy: support " + std::to_string(r->first) + "-" + std::to_string(r->last) +
                         " outside rows 1-" + std::to_string(d) + " of block " +
                         std::to_string(m + 1));
      }
    }
    const auto& j = config.joint_support[m];
    const auto& i = config.individual_support[m];
    if (j.first <= i.last && i.first <= j.last) {
      throw InputError("toy: joint and individual supports overlap in block " + std::to_string(m + 1));
    }
  }
}

Vector case_pattern(Index cases, int harmonic, double shape) {
  if (harmonic == 0) throw InputError("case_pattern: harmonic must be non-zero");
  Vector s(cases);
  const double k = static_cast<double>(std::abs(harmonic));
  for (Index i = 0; i < cases; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(cases);
    const double w = harmonic > 0 ? std::sin(2.0 * std::numbers::pi * k * t)
                                  : std::cos(2.0 * std::numbers::pi * k * t);
    s(i) = std::copysign(std::pow(std::abs(w), shape), w);
  }
  return s / s.cwiseAbs().maxCoeff();
}

ToyData simulate_toy(const ToyConfig& config) {
  validate(config);
  const Index n = config.cases;
  const Vector joint_pattern = case_pattern(n, 1, config.joint_shape);
  const std::array<Vector, 2> individual_pattern = {
      case_pattern(n, 2, config.individual_shape[0]),
      case_pattern(n, -1, config.individual_shape[1])};

  std::array<Matrix, 2> joint;
  std::array<Matrix, 2> individual;
  std::array<Matrix, 2> noise;
  std::array<Matrix, 2> data;
  ToyGroundTruth truth;
  truth.joint_scores = joint_pattern.normalized();
  for (std::size_t m = 0; m < 2; ++m) {
    const Index d = config.features[m];
    const Vector u = support_indicator(d, config.joint_support[m]);
    const Vector w = support_indicator(d, config.individual_support[m]);
    joint[m] = config.joint_amplitude * u * joint_pattern.transpose();
    individual[m] = config.individual_amplitude * w * individual_pattern[m].transpose();
    RandomStream rng(config.seed, m);
    noise[m] = gaussian_noise(d, n, config.noise_variance, rng);
    data[m] = center_rows(joint[m] + individual[m] + noise[m]);

    truth.individual_scores[m] = individual_pattern[m].normalized();
    truth.joint_loadings[m] = u;
    truth.individual_loadings[m] = w;
    truth.joint_mask[m] = to_mask(u);
    truth.individual_mask[m] = to_mask(w);
  }

  auto block = [&](std::size_t m) {
    DataBlock b = DataBlock::unlabeled("block" + std::to_string(m + 1), data[m]);
    return b.with_matrix(data[m], true);
  };
  return ToyData{{block(0), block(1)}, std::move(truth), std::move(joint), std::move(individual),
                 std::move(noise)};
}

double accuracy(const std::vector<bool>& significant, const std::vector<bool>& truth) {
  if (significant.size() != truth.size()) throw InputError("accuracy: mask lengths differ");
  if (truth.empty()) throw InputError("accuracy: empty masks");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) agree += significant[i] == truth[i] ? 1 : 0;
  return static_cast<double>(agree) / static_cast<double>(truth.size());
}

double true_positive_rate(const std::vector<bool>& significant, const std::vector<bool>& truth) {
  if (significant.size() != truth.size()) throw InputError("true_positive_rate: mask lengths differ");
  std::size_t positives = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      ++positives;
      if (significant[i]) ++hits;
    }
  }
  return positives == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(positives);
}

Pairing pair_components(std::span<const Vector> estimated, std::span<const Vector> truth) {
  if (estimated.size() != truth.size()) throw InputError("pair_components: counts differ");
  if (estimated.size() > 8) throw InputError("pair_components: at most 8 components");
  std::vector<Index> perm(estimated.size());
  std::iota(perm.begin(), perm.end(), Index{0});
  Pairing best;
  best.total_angle = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      total += vector_angle(estimated[i], truth[static_cast<std::size_t>(perm[i])]);
    }
    if (total < best.total_angle) {
      best.total_angle = total;
      best.truth_for_estimate = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

ComparisonTables compare_methods(const ToyConfig& config, const JackstrawConfig& jconfig) {
  const ToyData toy = simulate_toy(config);
  const AjiveOptions options{{2, 2}, 1, false};
  const AjiveDecomposition dec = ajive_decompose(toy.blocks, options);

  ComparisonTables out;
  // Each of the eight cells gets its own permutation stream.
  auto cell_config = [&](std::size_t cell) {
    JackstrawConfig c = jconfig;
    c.seed = derive_seed(jconfig.seed, cell);
    return c;
  };

  for (std::size_t m = 0; m < 2; ++m) {
    const DataBlock& block = toy.blocks[m];
    const std::array<Space, 2> spaces = {Space::joint, Space::individual};
    const std::array<const std::vector<bool>*, 2> masks = {&toy.truth.joint_mask[m],
                                                           &toy.truth.individual_mask[m]};
    const std::array<const Vector*, 2> true_loadings = {&toy.truth.joint_loadings[m],
                                                        &toy.truth.individual_loadings[m]};

    for (std::size_t s = 0; s < 2; ++s) {
      const std::size_t col = 2 * m + s;
      const JackstrawTarget target{spaces[s], static_cast<Index>(m), 0};
      const JackstrawResult r = jackstraw_run(toy.blocks, target, options, cell_config(col));
      const Vector scores = select_scores(dec, spaces[s], static_cast<Index>(m), 0);
      out.ajive_accuracy[col] = accuracy(r.significant, *masks[s]);
      out.ajive_tpr[col] = true_positive_rate(r.significant, *masks[s]);
      out.ajive_significant[col] = r.significant_count();
      out.ajive_angle[col] = vector_angle(block.matrix() * scores, *true_loadings[s]);
    }

    const PcaResult p = pca(block.matrix(), 2);
    const std::array<Vector, 2> estimated = {p.loadings.col(0), p.loadings.col(1)};
    const std::array<Vector, 2> truth = {*true_loadings[0], *true_loadings[1]};
    const Pairing pairing = pair_components(estimated, truth);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto s = static_cast<std::size_t>(pairing.truth_for_estimate[k]);
      const std::size_t col = 2 * m + s;
      const JackstrawResult r =
          pca_jackstraw_run(block, 2, static_cast<Index>(k), cell_config(4 + col));
      out.pca_accuracy[col] = accuracy(r.significant, *masks[s]);
      out.pca_tpr[col] = true_positive_rate(r.significant, *masks[s]);
      out.pca_significant[col] = r.significant_count();
      out.pca_angle[col] = vector_angle(estimated[k], truth[s]);
      out.pca_component[col] = static_cast<Index>(k);
    }
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

ComparisonTables median_tables(std::span<const ComparisonTables> tables) {
  if (tables.empty()) throw InputError("median_tables: no tables");
  ComparisonTables out = tables.front();
  auto column_median = [&](auto member, std::size_t col) {
    std::vector<double> v;
    v.reserve(tables.size());
    for (const auto& t : tables) v.push_back(static_cast<double>((t.*member)[col]));
    return median(std::move(v));
  };
  for (std::size_t c = 0; c < 4; ++c) {
    out.ajive_accuracy[c] = column_median(&ComparisonTables::ajive_accuracy, c);
    out.pca_accuracy[c] = column_median(&ComparisonTables::pca_accuracy, c);
    out.ajive_angle[c] = column_median(&ComparisonTables::ajive_angle, c);
    out.pca_angle[c] = column_median(&ComparisonTables::pca_angle, c);
    out.ajive_tpr[c] = column_median(&ComparisonTables::ajive_tpr, c);
    out.pca_tpr[c] = column_median(&ComparisonTables::pca_tpr, c);
    out.ajive_significant[c] =
        static_cast<std::size_t>(std::lround(column_median(&ComparisonTables::ajive_significant, c)));
    out.pca_significant[c] =
        static_cast<std::size_t>(std::lround(column_median(&ComparisonTables::pca_significant, c)));
  }
  return out;
}

}  // namespace jive
