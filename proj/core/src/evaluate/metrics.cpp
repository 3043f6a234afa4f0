#include "edakd/evaluate/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "edakd/errors.hpp"
#include "edakd/signal/segment.hpp"

namespace edakd::evaluate {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("metric inputs differ in length");
  if (a.empty()) throw ShapeError("metric inputs are empty");
}

double residual_energy(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

double mae(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double rmse(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  return std::sqrt(residual_energy(a, b) / static_cast<double>(a.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const double ma = signal::mean(a), mb = signal::mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  const double n = static_cast<double>(a.size());
  const double sa = std::max(std::sqrt(saa / n), signal::kSigmaFloor);
  const double sb = std::max(std::sqrt(sbb / n), signal::kSigmaFloor);
  return std::clamp(sab / n / (sa * sb), -1.0, 1.0);
}

double snr_improvement(std::span<const double> noisy, std::span<const double> clean,
                       std::span<const double> estimate) {
  check_pair(noisy, clean);
  check_pair(estimate, clean);
  const double num = residual_energy(noisy, clean);
  const double den = residual_energy(estimate, clean);
  if (num == den) return 0.0;
  const double db = 10.0 * (std::log10(std::max(num, kEnergyFloor)) -
                            std::log10(std::max(den, kEnergyFloor)));
  return std::clamp(db, -kSnrCapDb, kSnrCapDb);
}

ReconMetrics recon_metrics(std::span<const double> noisy, std::span<const double> clean,
                           std::span<const double> estimate) {
  ReconMetrics m;
  m.mae = mae(estimate, clean);
  m.rmse = rmse(estimate, clean);
  m.pcc = pearson(estimate, clean);
  m.snr_imp_db = snr_improvement(noisy, clean, estimate);
  return m;
}

std::vector<double> exp_filter(std::span<const double> x, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ConfigError("exp_filter alpha must lie in [0, 1)");
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  // Increment form keeps constant inputs exactly fixed.
  for (std::size_t n = 1; n < x.size(); ++n) y[n] = y[n - 1] + (1.0 - alpha) * (x[n] - y[n - 1]);
  return y;
}

}  // namespace edakd::evaluate
