#pragma once

#include "jive/jackstraw.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace jive {

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  std::size_t dropped = 0;  // non-finite samples ignored
};

inline constexpr std::size_t kKdeGridPoints = 512;

/// Silverman's rule: 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian kernel density on a 512-point grid over [min - 3h, max + 3h].
/// Non-finite samples are dropped; fewer than two usable samples, or a zero
/// bandwidth, is an InputError.
DensityCurve kde(std::span<const double> samples, std::optional<double> bandwidth = {});

/// Linear interpolation of the curve; 0 outside the grid.
double density_at(const DensityCurve& curve, double x);

/// Asymptotic Kolmogorov survival function Q(lambda), 20 terms.
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1).
KsResult ks_uniform_test(std::span<const double> p);

struct ObservedPoint {
  Index feature = 0;
  double log10_f = 0.0;  // -inf for F = 0, +inf for a perfect fit
  bool significant = false;
};

struct RankedPvalue {
  Index rank = 0;
  double p = 0.0;
};

struct DiagnosticReport {
  DensityCurve null_density;  // on log10(F)
  std::vector<ObservedPoint> observed_points;
  std::vector<RankedPvalue> sorted_pvalues;
  KsResult ks;
  std::size_t null_zero_dropped = 0;
  std::size_t null_infinite = 0;
  std::size_t observed_infinite = 0;
  std::size_t significant = 0;
};

DiagnosticReport build_report(const JackstrawResult& result);

/// Writes <prefix>_null_density.svg, <prefix>_pvalues.svg and <prefix>_ks.svg.
void write_svg_panels(const DiagnosticReport& report, const std::filesystem::path& prefix);

}  // namespace jive
