#include "jive/diagnostics.hpp"

#include "jive/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

namespace jive {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> finite_only(std::span<const double> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (double x : samples) {
    if (std::isfinite(x)) out.push_back(x);
  }
  return out;
}

double silverman_of_finite(std::vector<double> values) {
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  std::sort(values.begin(), values.end());
  const double iqr = quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

// SVG helpers. Panels share a 400 x 300 canvas with a 40 px margin.
constexpr double kWidth = 400.0;
constexpr double kHeight = 300.0;
constexpr double kMargin = 40.0;

struct Axes {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const {
    return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin);
  }
};

std::string svg_open(const std::string& title) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << title
    << "</text>\n"
    << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
    << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#444\"/>\n";
  return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  std::vector<double> values = finite_only(samples);
  if (values.size() < 2) throw InputError("bandwidth: need at least two finite samples");
  return silverman_of_finite(std::move(values));
}

DensityCurve kde(std::span<const double> samples, std::optional<double> bandwidth) {
  std::vector<double> values = finite_only(samples);
  DensityCurve out;
  out.dropped = samples.size() - values.size();
  if (values.size() < 2) throw InputError("kde: need at least two finite samples");

  const double h = bandwidth ? *bandwidth : silverman_of_finite(values);
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InputError("kde: bandwidth is zero (all samples equal?)");
  }
  out.bandwidth = h;

  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it - 3.0 * h;
  const double hi = *max_it + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(kKdeGridPoints - 1);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));

  out.grid.resize(kKdeGridPoints);
  out.density.resize(kKdeGridPoints);
  for (std::size_t g = 0; g < kKdeGridPoints; ++g) {
    const double x = lo + step * static_cast<double>(g);
    double sum = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      sum += std::exp(-0.5 * z * z);
    }
    out.grid[g] = x;
    out.density[g] = sum * norm;
  }
  return out;
}

double density_at(const DensityCurve& curve, double x) {
  if (curve.grid.empty() || x < curve.grid.front() || x > curve.grid.back()) return 0.0;
  const auto it = std::upper_bound(curve.grid.begin(), curve.grid.end(), x);
  if (it == curve.grid.end()) return curve.density.back();
  const auto hi = static_cast<std::size_t>(it - curve.grid.begin());
  const auto lo = hi - 1;
  const double t = (x - curve.grid[lo]) / (curve.grid[hi] - curve.grid[lo]);
  return curve.density[lo] + t * (curve.density[hi] - curve.density[lo]);
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniform_test(std::span<const double> p) {
  if (p.empty()) throw InputError("ks_uniform_test: no values");
  std::vector<double> sorted(p.begin(), p.end());
  for (double v : sorted) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("ks_uniform_test: values must lie in [0, 1]");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double above = static_cast<double>(i + 1) / n - sorted[i];
    const double below = sorted[i] - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return KsResult{d, kolmogorov_survival(std::sqrt(n) * d)};
}

DiagnosticReport build_report(const JackstrawResult& result) {
  if (result.f_null.empty()) throw InputError("diagnostic report: empty null sample");
  const std::size_t d = result.f_observed.size();
  if (result.p_raw.size() != d || result.significant.size() != d) {
    throw InputError("diagnostic report: inconsistent result lengths");
  }

  DiagnosticReport out;
  std::vector<double> log_null;
  log_null.reserve(result.f_null.size());
  for (double f : result.f_null) {
    if (std::isinf(f)) {
      ++out.null_infinite;
    } else if (!(f > 0.0)) {
      ++out.null_zero_dropped;
    } else {
      log_null.push_back(std::log10(f));
    }
  }
  out.null_density = kde(log_null);

  out.observed_points.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double f = result.f_observed[j];
    if (std::isinf(f)) ++out.observed_infinite;
    out.observed_points.push_back(ObservedPoint{static_cast<Index>(j), std::log10(f),
                                                static_cast<bool>(result.significant[j])});
  }
  out.significant = result.significant_count();

  std::vector<double> sorted = result.p_raw;
  std::sort(sorted.begin(), sorted.end());
  out.sorted_pvalues.reserve(d);
  for (std::size_t i = 0; i < d; ++i) {
    out.sorted_pvalues.push_back(RankedPvalue{static_cast<Index>(i + 1), sorted[i]});
  }
  out.ks = ks_uniform_test(result.p_raw);
  return out;
}

void write_svg_panels(const DiagnosticReport& report, const std::filesystem::path& prefix) {
  const auto path_for = [&](const std::string& suffix) {
    return std::filesystem::path(prefix.string() + suffix);
  };

  {
    const auto& c = report.null_density;
    double x0 = c.grid.front();
    double x1 = c.grid.back();
    for (const auto& p : report.observed_points) {
      if (std::isfinite(p.log10_f)) {
        x0 = std::min(x0, p.log10_f);
        x1 = std::max(x1, p.log10_f);
      }
    }
    const double ymax = *std::max_element(c.density.begin(), c.density.end());
    const Axes ax{x0, x1, -0.08 * ymax, 1.05 * ymax};
    std::ostringstream s;
    s << svg_open("Null density of log10(F)") << "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (std::size_t g = 0; g < c.grid.size(); ++g) {
      s << ax.px(c.grid[g]) << ',' << ax.py(c.density[g]) << ' ';
    }
    s << "\"/>\n";
    for (const auto& p : report.observed_points) {
      if (!std::isfinite(p.log10_f)) continue;
      s << "<circle cx=\"" << ax.px(p.log10_f) << "\" cy=\"" << ax.py(-0.04 * ymax)
        << "\" r=\"2\" fill=\"" << (p.significant ? "red" : "blue") << "\"/>\n";
    }
    s << "</svg>\n";
    write_file(path_for("_null_density.svg"), s.str());
  }

  {
    const auto n = static_cast<double>(report.sorted_pvalues.size());
    const Axes ax{0.0, std::max(1.0, n), 0.0, 1.0};
    std::ostringstream s;
    s << svg_open("Sorted p-values") << "<polyline fill=\"none\" stroke=\"black\" points=\"";
    for (const auto& r : report.sorted_pvalues) {
      s << ax.px(static_cast<double>(r.rank)) << ',' << ax.py(r.p) << ' ';
    }
    s << "\"/>\n</svg>\n";
    write_file(path_for("_pvalues.svg"), s.str());
  }

  {
    const auto n = static_cast<double>(report.sorted_pvalues.size());
    const Axes ax{0.0, 1.0, 0.0, 1.0};
    std::ostringstream s;
    s << svg_open("K-S: D = " + std::to_string(report.ks.statistic) +
                  ", p = " + std::to_string(report.ks.pvalue))
      << "<line x1=\"" << ax.px(0) << "\" y1=\"" << ax.py(0) << "\" x2=\"" << ax.px(1)
      << "\" y2=\"" << ax.py(1) << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n"
      << "<polyline fill=\"none\" stroke=\"red\" points=\"" << ax.px(0) << ',' << ax.py(0) << ' ';
    for (const auto& r : report.sorted_pvalues) {
      s << ax.px(r.p) << ',' << ax.py(static_cast<double>(r.rank - 1) / n) << ' ' << ax.px(r.p)
        << ',' << ax.py(static_cast<double>(r.rank) / n) << ' ';
    }
    s << ax.px(1) << ',' << ax.py(1) << "\"/>\n</svg>\n";
    write_file(path_for("_ks.svg"), s.str());
  }
}

}  // namespace jive
