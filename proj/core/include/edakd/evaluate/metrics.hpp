#pragma once

#include <span>
#include <vector>

namespace edakd::evaluate {

/// Reported in place of +/-infinity when a residual energy is zero.
inline constexpr double kSnrCapDb = 300.0;
inline constexpr double kEnergyFloor = 1e-30;

struct ReconMetrics {
  double mae = 0.0;
  double rmse = 0.0;
  double pcc = 0.0;
  double snr_imp_db = 0.0;
};

double mae(std::span<const double> a, std::span<const double> b);
double rmse(std::span<const double> a, std::span<const double> b);
/// Pearson correlation; standard deviations are floored so constant inputs give 0.
double pearson(std::span<const double> a, std::span<const double> b);

/// 10*log10(sum (x-y)^2 / sum (est-y)^2) computed as a difference of logs so
/// that swapping x and est negates it exactly. Energies are floored at 1e-30
/// and the result is clamped to +/-300 dB; equal energies give exactly 0.
double snr_improvement(std::span<const double> noisy, std::span<const double> clean,
                       std::span<const double> estimate);

/// All metrics compare `estimate` against `clean`.
ReconMetrics recon_metrics(std::span<const double> noisy, std::span<const double> clean,
                           std::span<const double> estimate);

/// y[0] = x[0]; y[n] = alpha*y[n-1] + (1-alpha)*x[n].
std::vector<double> exp_filter(std::span<const double> x, double alpha = 0.8);

}  // namespace edakd::evaluate
