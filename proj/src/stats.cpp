#include "crowdsweep/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "crowdsweep/errors.hpp"

namespace crowdsweep {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a, b), evaluated with Lentz's method.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// Pearson correlation; NaN when either side has zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  const size_t n = xs.size();
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / double(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / double(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return kNan;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) hold equal values; all get the mean rank.
    const double rank = 1.0 + 0.5 * double(i + j);
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double front = std::exp(ln_front);
  // The continued fraction converges fast only below the mean; mirror above.
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cf(a, b, x) / a;
  }
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!std::isfinite(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return incomplete_beta(0.5 * dof, 0.5, x);
}

SpearmanResult spearman(const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw InternalError("spearman: need equal-length inputs with n >= 3");
  }
  const std::vector<double> rx = average_ranks(xs);
  const std::vector<double> ry = average_ranks(ys);
  const double rho = pearson(rx, ry);
  if (std::isnan(rho)) {
    return {kNan, kNan, false};
  }
  const double clamped = std::clamp(rho, -1.0, 1.0);
  const double n = double(xs.size());
  if (std::fabs(clamped) >= 1.0) {
    return {clamped, 0.0, true};
  }
  const double t =
      clamped * std::sqrt((n - 2.0) / (1.0 - clamped * clamped));
  return {clamped, student_t_two_sided_p(t, n - 2.0), true};
}

CorrelationReport correlate_experiment(std::vector<LevelStat> rows,
                                       std::string factor,
                                       std::string metric) {
  CorrelationReport report;
  report.factor = std::move(factor);
  report.metric = std::move(metric);
  report.table = std::move(rows);

  std::vector<double> xs;
  std::vector<double> ys;
  for (const LevelStat& row : report.table) {
    if (row.count <= 0 || std::isnan(row.mean)) continue;
    xs.push_back(double(row.level_index));
    ys.push_back(row.mean);
  }
  report.n_points = int(xs.size());
  if (xs.size() < 3) {
    report.insufficient = true;
    report.defined = false;
    report.rho = kNan;
    report.p_value = kNan;
    return report;
  }
  const SpearmanResult r = spearman(xs, ys);
  report.rho = r.rho;
  report.p_value = r.p_value;
  report.defined = r.defined;
  return report;
}

}  // namespace crowdsweep
