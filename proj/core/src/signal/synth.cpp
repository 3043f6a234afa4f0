#include "edakd/signal/synth.hpp"

#include <algorithm>
#include <array>
// pchip.hpp in Boost 1.74 calls isnan unqualified.
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>
#include <cstdio>
#include <random>

#include "edakd/errors.hpp"
#include "edakd/rng.hpp"

namespace edakd::signal {
namespace {

constexpr double kKernelCutoff = 1e-4;

double raw_kernel(double t, double rise, double decay) {
  return std::exp(-t / decay) - std::exp(-t / rise);
}

// First time after the peak at which the kernel drops below cutoff * peak.
double kernel_support(double rise, double decay) {
  const double tp = scr_kernel_peak_time(rise, decay);
  const double peak = raw_kernel(tp, rise, decay);
  double t = tp;
  double step = std::max(rise, decay) * 0.5;
  while (raw_kernel(t + step, rise, decay) >= kKernelCutoff * peak) t += step;
  for (int i = 0; i < 60; ++i) {
    step *= 0.5;
    if (raw_kernel(t + step, rise, decay) >= kKernelCutoff * peak) t += step;
  }
  return t + step;
}

}  // namespace

void SynthConfig::validate() const {
  if (!(duration_s > 0.0)) throw ConfigError("synth: duration_s must be positive");
  if (!(rate_hz > 0.0)) throw ConfigError("synth: rate_hz must be positive");
  if (!(tonic_low > 0.0) || !(tonic_low < tonic_high)) {
    throw ConfigError("synth: require 0 < tonic_low < tonic_high");
  }
  if (!(tonic_knot_interval_s > 0.0)) throw ConfigError("synth: knot interval must be positive");
  if (!(scr_rate_per_min >= 0.0)) throw ConfigError("synth: scr rate must be >= 0");
  if (!(scr_amp_log_sigma >= 0.0)) throw ConfigError("synth: amplitude sigma must be >= 0");
  if (!(rise_tau_s > 0.0) || !(decay_tau_s > 0.0) || rise_tau_s == decay_tau_s) {
    throw ConfigError("synth: SCR time constants must be positive and distinct");
  }
}

SynthConfig SynthConfig::from_config(const KeyValueConfig& kv) {
  SynthConfig c;
  c.duration_s = kv.get_double("synth.duration_s", c.duration_s);
  c.rate_hz = kv.get_double("synth.rate_hz", c.rate_hz);
  c.tonic_low = kv.get_double("synth.tonic_low", c.tonic_low);
  c.tonic_high = kv.get_double("synth.tonic_high", c.tonic_high);
  c.tonic_knot_interval_s = kv.get_double("synth.tonic_knot_interval_s", c.tonic_knot_interval_s);
  c.scr_rate_per_min = kv.get_double("synth.scr_rate_per_min", c.scr_rate_per_min);
  c.scr_amp_log_mu = kv.get_double("synth.scr_amp_log_mu", c.scr_amp_log_mu);
  c.scr_amp_log_sigma = kv.get_double("synth.scr_amp_log_sigma", c.scr_amp_log_sigma);
  c.rise_tau_s = kv.get_double("synth.rise_tau_s", c.rise_tau_s);
  c.decay_tau_s = kv.get_double("synth.decay_tau_s", c.decay_tau_s);
  c.seed = static_cast<std::uint64_t>(kv.get_int("synth.seed", static_cast<long long>(c.seed)));
  c.validate();
  return c;
}

double scr_kernel_peak_time(double rise, double decay) {
  return std::log(decay / rise) * (decay * rise) / (decay - rise);
}

std::vector<double> scr_kernel(double rise, double decay, double rate_hz) {
  const double support = kernel_support(rise, decay);
  const auto n = static_cast<std::size_t>(std::ceil(support * rate_hz)) + 1;
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = raw_kernel(static_cast<double>(i) / rate_hz, rise, decay);
  const double peak = *std::max_element(h.begin(), h.end());
  for (double& v : h) v /= peak;
  while (h.size() > 1 && h.back() < kKernelCutoff) h.pop_back();
  return h;
}

std::vector<double> render_scrs(std::size_t length, double rate_hz, double tonic_level,
                                const std::vector<double>& onsets_s,
                                const std::vector<double>& amplitudes, double rise,
                                double decay) {
  const double peak = raw_kernel(scr_kernel_peak_time(rise, decay), rise, decay);
  const double support = kernel_support(rise, decay);
  std::vector<double> out(length, tonic_level);
  for (std::size_t k = 0; k < onsets_s.size(); ++k) {
    const double onset = onsets_s[k];
    const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(onset * rate_hz)));
    for (std::size_t n = first; n < length; ++n) {
      const double t = static_cast<double>(n) / rate_hz - onset;
      if (t > support) break;
      out[n] += amplitudes[k] * raw_kernel(t, rise, decay) / peak;
    }
  }
  return out;
}

SynthComponents synthesize_eda_components(const SynthConfig& config, std::string subject_id) {
  config.validate();
  Rng rng(derive_seed(config.seed, {0x70171c}));
  const auto n = static_cast<std::size_t>(std::llround(config.duration_s * config.rate_hz));
  if (n == 0) throw ConfigError("synth: duration shorter than one sample");

  // Tonic: PCHIP through uniform knots (no overshoot, so values stay in range).
  const std::size_t knots =
      std::max<std::size_t>(4, static_cast<std::size_t>(
                                   std::ceil(config.duration_s / config.tonic_knot_interval_s)) + 1);
  const double spacing = config.duration_s / static_cast<double>(knots - 1);
  std::uniform_real_distribution<double> level(config.tonic_low, config.tonic_high);
  std::vector<double> kx(knots), ky(knots);
  for (std::size_t i = 0; i < knots; ++i) {
    kx[i] = spacing * static_cast<double>(i);
    ky[i] = level(rng);
  }
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(kx), std::move(ky));

  SynthComponents out;
  out.tonic.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::min(static_cast<double>(i) / config.rate_hz, config.duration_s);
    out.tonic[i] = spline(t);
  }

  // Phasic: homogeneous Poisson onsets with lognormal peak amplitudes.
  if (config.scr_rate_per_min > 0.0) {
    std::exponential_distribution<double> gap(config.scr_rate_per_min / 60.0);
    std::lognormal_distribution<double> amp(config.scr_amp_log_mu, config.scr_amp_log_sigma);
    for (double t = gap(rng); t < config.duration_s; t += gap(rng)) {
      out.onsets_s.push_back(t);
      out.amplitudes.push_back(amp(rng));
    }
  }
  out.phasic = render_scrs(n, config.rate_hz, 0.0, out.onsets_s, out.amplitudes,
                           config.rise_tau_s, config.decay_tau_s);

  out.signal.rate_hz = config.rate_hz;
  out.signal.subject_id = std::move(subject_id);
  out.signal.condition = Condition::clean;
  out.signal.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.signal.samples[i] = out.tonic[i] + out.phasic[i];
  return out;
}

SampledSignal synthesize_eda(const SynthConfig& config, std::string subject_id) {
  return synthesize_eda_components(config, std::move(subject_id)).signal;
}

std::vector<SampledSignal> synthesize_subjects(const CohortSynthSpec& spec) {
  spec.base.validate();
  constexpr std::array<Site, 3> kSites{Site::finger, Site::hand, Site::foot};
  std::vector<SampledSignal> out;
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    Rng rng(derive_seed(spec.seed, {0x5ab1, s}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 0.3);
    SynthConfig cfg = spec.base;
    const double span = spec.base.tonic_high - spec.base.tonic_low;
    const double center = spec.base.tonic_low + span * unit(rng);
    const double half_width = span * (0.1 + 0.2 * unit(rng));
    cfg.tonic_low = std::max(center - half_width, 0.5 * spec.base.tonic_low);
    cfg.tonic_high = center + half_width;
    cfg.scr_rate_per_min = spec.base.scr_rate_per_min * (0.5 + unit(rng));
    cfg.scr_amp_log_mu = spec.base.scr_amp_log_mu + jitter(rng);
    cfg.duration_s = spec.recording_s;
    cfg.seed = derive_seed(spec.seed, {0x5eed, s});
    char id[16];
    std::snprintf(id, sizeof id, "S%02zu", s + 1);
    auto sig = synthesize_eda(cfg, id);
    sig.site = kSites[s % kSites.size()];
    out.push_back(std::move(sig));
  }
  return out;
}

}  // namespace edakd::signal
