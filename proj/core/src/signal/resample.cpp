#include <algorithm>
#include <cmath>
#include <numbers>

#include "edakd/errors.hpp"
#include "edakd/signal/segment.hpp"

namespace edakd::signal {
namespace {

constexpr std::size_t kTaps = 129;
// Cutoff as a fraction of the target rate; keeps the Hamming transition band
// (about 3.3 * rate / taps wide) below the target Nyquist frequency.
constexpr double kCutoffFraction = 0.4;

std::vector<double> lowpass_taps(double cutoff_hz, double rate_hz) {
  const double fc = cutoff_hz / rate_hz;
  const double half = static_cast<double>(kTaps - 1) / 2.0;
  std::vector<double> h(kTaps);
  double sum = 0.0;
  for (std::size_t n = 0; n < kTaps; ++n) {
    const double m = static_cast<double>(n) - half;
    const double sinc = m == 0.0 ? 2.0 * fc
                                 : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double hamming =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                               static_cast<double>(kTaps - 1));
    h[n] = sinc * hamming;
    sum += h[n];
  }
  for (double& v : h) v /= sum;
  return h;
}

}  // namespace

SampledSignal downsample(const SampledSignal& signal, double target_hz) {
  signal.validate();
  if (!(target_hz > 0.0) || target_hz >= signal.rate_hz) {
    throw ConfigError("downsample: target rate " + std::to_string(target_hz) +
                      " Hz must be below the source rate " + std::to_string(signal.rate_hz) + " Hz");
  }
  const auto& x = signal.samples;
  const std::size_t n = x.size();
  const auto taps = lowpass_taps(kCutoffFraction * target_hz, signal.rate_hz);
  const auto half = static_cast<std::ptrdiff_t>(kTaps / 2);

  std::vector<double> filtered(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < kTaps; ++j) {
      auto idx = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(j) - half;
      idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(n) - 1);
      acc += taps[j] * x[static_cast<std::size_t>(idx)];
    }
    filtered[i] = acc;
  }

  const double ratio = signal.rate_hz / target_hz;
  const auto out_len = static_cast<std::size_t>(std::floor(static_cast<double>(n) / ratio + 1e-9));
  SampledSignal out{{}, target_hz, signal.subject_id, signal.site, signal.condition};
  out.samples.reserve(out_len);
  for (std::size_t m = 0; m < out_len; ++m) {
    const double pos = static_cast<double>(m) * ratio;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) < 1e-9) {
      out.samples.push_back(filtered[std::min(static_cast<std::size_t>(nearest), n - 1)]);
    } else {
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, n - 1);
      const double frac = pos - static_cast<double>(lo);
      out.samples.push_back((1.0 - frac) * filtered[lo] + frac * filtered[hi]);
    }
  }
  if (out.samples.empty()) throw ConfigError("downsample: signal too short for target rate");
  return out;
}

}  // namespace edakd::signal
