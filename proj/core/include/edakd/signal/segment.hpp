#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edakd::signal {

inline constexpr std::size_t kSegmentLength = 512;
inline constexpr double kSegmentRateHz = 4.0;
/// Lower bound on the normalization scale (μS); makes flat segments well defined.
inline constexpr double kSigmaFloor = 1e-6;

enum class Site { finger, hand, foot, leg, other };
enum class Condition { clean, noisy, unknown };
enum class Role { train, val, test };
enum class SegmentKind { clean_target, augmented_input, real_noisy };

std::string_view to_string(Site site);
std::string_view to_string(Condition condition);
std::string_view to_string(Role role);
std::string_view to_string(SegmentKind kind);
Site parse_site(std::string_view text);
Condition parse_condition(std::string_view text);
Role parse_role(std::string_view text);
SegmentKind parse_kind(std::string_view text);

/// A uniformly sampled EDA recording in microsiemens.
struct SampledSignal {
  std::vector<double> samples;
  double rate_hz = kSegmentRateHz;
  std::string subject_id;
  Site site = Site::finger;
  Condition condition = Condition::unknown;

  /// Throws ConfigError when empty, non-finite, or rate <= 0.
  void validate() const;
  double duration_s() const { return static_cast<double>(samples.size()) / rate_hz; }
};

/// 512 samples at 4 Hz (128 s) with provenance.
struct Segment {
  std::vector<double> samples;
  std::string subject_id;
  double start_time_s = 0.0;
  Role role = Role::train;
  SegmentKind kind = SegmentKind::clean_target;
  Site site = Site::finger;

  /// Throws ConfigError unless length is 512 and all values are finite.
  void validate() const;
};

struct NormStats {
  double mu = 0.0;
  double sigma = 1.0;
};

double mean(std::span<const double> x);
/// Population standard deviation.
double stddev(std::span<const double> x);

/// Z-score statistics with sigma floored at kSigmaFloor.
NormStats compute_stats(std::span<const double> x);

struct Normalized {
  std::vector<double> values;
  NormStats stats;
};

Normalized normalize(std::span<const double> x);
/// Standardizes with externally supplied statistics.
std::vector<double> normalize_with(std::span<const double> x, const NormStats& stats);
std::vector<double> denormalize(std::span<const double> z, const NormStats& stats);

enum class WindowAnchor {
  start,  // first window begins at sample 0; trailing remainder dropped
  end,    // last window ends at the final sample; leading remainder dropped
};

/// Start indices of full windows. stride = round(window_len * (1 - overlap)).
/// Returns an empty list when the signal is shorter than one window.
std::vector<std::size_t> window_starts(std::size_t signal_length, std::size_t window_len,
                                       double overlap, WindowAnchor anchor = WindowAnchor::start);

/// Cuts a 4 Hz signal into 512-sample segments.
std::vector<Segment> window(const SampledSignal& signal, double overlap,
                            WindowAnchor anchor = WindowAnchor::start, Role role = Role::train,
                            SegmentKind kind = SegmentKind::clean_target);

/// Anti-aliased decimation: windowed-sinc low-pass (129 taps) followed by
/// sampling at target_hz. Throws ConfigError if target_hz >= rate_hz.
SampledSignal downsample(const SampledSignal& signal, double target_hz);

struct SubjectSplit {
  std::vector<Segment> train;
  std::vector<Segment> val;
};

/// Subject-disjoint split. round(train_fraction * subjects) subjects go to
/// train, clamped to [1, subjects - 1]. Throws ConfigError with < 2 subjects.
SubjectSplit split_by_subject(std::vector<Segment> segments, double train_fraction,
                              std::uint64_t seed);

}  // namespace edakd::signal
