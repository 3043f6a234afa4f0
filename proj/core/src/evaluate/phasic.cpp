#include "edakd/evaluate/phasic.hpp"

#include <algorithm>

#include "edakd/errors.hpp"

namespace edakd::evaluate {

namespace {

double padded(std::span<const double> x, std::ptrdiff_t i) {
  return x[static_cast<std::size_t>(std::max<std::ptrdiff_t>(i, 0))];
}

}  // namespace

std::vector<double> moving_median(std::span<const double> x, std::size_t window) {
  if (window == 0) throw ConfigError("window must be positive");
  std::vector<double> out(x.size());
  std::vector<double> buf(window);
  for (std::size_t n = 0; n < x.size(); ++n) {
    for (std::size_t k = 0; k < window; ++k) {
      buf[k] = padded(x, static_cast<std::ptrdiff_t>(n) - static_cast<std::ptrdiff_t>(window - 1 - k));
    }
    const std::size_t mid = window / 2;
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid), buf.end());
    double m = buf[mid];
    if (window % 2 == 0) {
      const double lower = *std::max_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid));
      m = 0.5 * (m + lower);
    }
    out[n] = m;
  }
  return out;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t window) {
  if (window == 0) throw ConfigError("window must be positive");
  std::vector<double> out(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    double s = 0.0;
    for (std::size_t k = 0; k < window; ++k) {
      s += padded(x, static_cast<std::ptrdiff_t>(n) - static_cast<std::ptrdiff_t>(k));
    }
    out[n] = s / static_cast<double>(window);
  }
  return out;
}

std::vector<double> tonic_estimate(std::span<const double> x) {
  return moving_average(moving_median(x, kMedianWindow), kAverageWindow);
}

std::vector<double> phasic_extract(std::span<const double> x) {
  const auto tonic = tonic_estimate(x);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i] - tonic[i], 0.0);
  return out;
}

double score_segment(std::span<const double> x) {
  const auto p = phasic_extract(x);
  return p.empty() ? 0.0 : *std::max_element(p.begin(), p.end());
}

}  // namespace edakd::evaluate
