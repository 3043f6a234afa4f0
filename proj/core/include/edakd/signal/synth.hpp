#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "edakd/signal/kv_config.hpp"
#include "edakd/signal/segment.hpp"

namespace edakd::signal {

/// Parameters of the synthetic tonic + phasic EDA generator.
struct SynthConfig {
  double duration_s = 600.0;
  double rate_hz = kSegmentRateHz;
  double tonic_low = 2.0;  // μS
  double tonic_high = 8.0;
  double tonic_knot_interval_s = 40.0;
  double scr_rate_per_min = 3.0;
  double scr_amp_log_mu = std::log(0.3);  // SCR peak amplitude ~ lognormal (μS)
  double scr_amp_log_sigma = 0.6;
  double rise_tau_s = 0.75;
  double decay_tau_s = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Reads the `synth.*` keys present in `config`, keeping defaults otherwise.
  static SynthConfig from_config(const KeyValueConfig& config);
};

/// Bi-exponential SCR impulse response exp(-t/decay) - exp(-t/rise), sampled
/// at rate_hz, scaled to unit peak and truncated once it falls below 1e-4 of
/// the peak.
std::vector<double> scr_kernel(double rise_tau_s, double decay_tau_s, double rate_hz);

/// Closed-form argmax of the bi-exponential kernel.
double scr_kernel_peak_time(double rise_tau_s, double decay_tau_s);

struct SynthComponents {
  SampledSignal signal;
  std::vector<double> tonic;
  std::vector<double> phasic;
  std::vector<double> onsets_s;
  std::vector<double> amplitudes;
};

/// tonic (PCHIP spline through uniform random knots) + Poisson SCR train.
SynthComponents synthesize_eda_components(const SynthConfig& config,
                                          std::string subject_id = "synthetic");
SampledSignal synthesize_eda(const SynthConfig& config, std::string subject_id = "synthetic");

/// Signal with SCRs at explicit onsets/amplitudes over a constant tonic level.
std::vector<double> render_scrs(std::size_t length, double rate_hz, double tonic_level,
                                const std::vector<double>& onsets_s,
                                const std::vector<double>& amplitudes, double rise_tau_s,
                                double decay_tau_s);

/// A population of subjects whose tonic level, range and SCR activity vary
/// around `base`.
struct CohortSynthSpec {
  std::size_t subjects = 20;
  double recording_s = 600.0;
  SynthConfig base;
  std::uint64_t seed = 0;
};

std::vector<SampledSignal> synthesize_subjects(const CohortSynthSpec& spec);

}  // namespace edakd::signal
