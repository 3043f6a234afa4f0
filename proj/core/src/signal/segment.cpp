#include "edakd/signal/segment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "edakd/errors.hpp"
#include "edakd/rng.hpp"

namespace edakd::signal {
namespace {

template <class Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::string_view, N>& names,
                const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == text) return static_cast<Enum>(i);
  }
  throw FormatError(std::string("unknown ") + what + ": '" + std::string(text) + "'");
}

constexpr std::array<std::string_view, 5> kSiteNames{"finger", "hand", "foot", "leg", "other"};
constexpr std::array<std::string_view, 3> kConditionNames{"clean", "noisy", "unknown"};
constexpr std::array<std::string_view, 3> kRoleNames{"train", "val", "test"};
constexpr std::array<std::string_view, 3> kKindNames{"clean_target", "augmented_input",
                                                     "real_noisy"};

}  // namespace

std::string_view to_string(Site site) { return kSiteNames[static_cast<std::size_t>(site)]; }
std::string_view to_string(Condition c) { return kConditionNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Role role) { return kRoleNames[static_cast<std::size_t>(role)]; }
std::string_view to_string(SegmentKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }
Site parse_site(std::string_view text) { return parse_enum<Site>(text, kSiteNames, "site"); }
Condition parse_condition(std::string_view text) {
  return parse_enum<Condition>(text, kConditionNames, "condition");
}
Role parse_role(std::string_view text) { return parse_enum<Role>(text, kRoleNames, "role"); }
SegmentKind parse_kind(std::string_view text) {
  return parse_enum<SegmentKind>(text, kKindNames, "segment kind");
}

void SampledSignal::validate() const {
  if (samples.empty()) throw ConfigError("signal '" + subject_id + "' has no samples");
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw ConfigError("sampling rate must be positive");
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); })) {
    throw ConfigError("signal '" + subject_id + "' contains non-finite samples");
  }
}

void Segment::validate() const {
  if (samples.size() != kSegmentLength) {
    throw ConfigError("segment of subject '" + subject_id + "' has " +
                      std::to_string(samples.size()) + " samples, expected 512");
  }
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); })) {
    throw ConfigError("segment of subject '" + subject_id + "' contains non-finite samples");
  }
}

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const auto n = static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += v;
  const double m = s / n;
  // Second pass removes the rounding left by the first; constants come out exact.
  double r = 0.0;
  for (double v : x) r += v - m;
  return m + r / n;
}

double stddev(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size()));
}

NormStats compute_stats(std::span<const double> x) {
  return {mean(x), std::max(stddev(x), kSigmaFloor)};
}

std::vector<double> normalize_with(std::span<const double> x, const NormStats& stats) {
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - stats.mu) / stats.sigma;
  return z;
}

Normalized normalize(std::span<const double> x) {
  const NormStats stats = compute_stats(x);
  return {normalize_with(x, stats), stats};
}

std::vector<double> denormalize(std::span<const double> z, const NormStats& stats) {
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * stats.sigma + stats.mu;
  return x;
}

std::vector<std::size_t> window_starts(std::size_t signal_length, std::size_t window_len,
                                       double overlap, WindowAnchor anchor) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
  if (window_len == 0) throw ConfigError("window length must be positive");
  const auto stride = static_cast<std::size_t>(
      std::llround(static_cast<double>(window_len) * (1.0 - overlap)));
  if (stride == 0) throw ConfigError("overlap leaves a zero window stride");
  std::vector<std::size_t> starts;
  if (signal_length < window_len) return starts;
  const std::size_t count = (signal_length - window_len) / stride + 1;
  const std::size_t lead =
      anchor == WindowAnchor::end ? signal_length - window_len - (count - 1) * stride : 0;
  starts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) starts.push_back(lead + i * stride);
  return starts;
}

std::vector<Segment> window(const SampledSignal& signal, double overlap, WindowAnchor anchor,
                            Role role, SegmentKind kind) {
  signal.validate();
  if (std::abs(signal.rate_hz - kSegmentRateHz) > 1e-9) {
    throw ConfigError("window() expects a 4 Hz signal; downsample first");
  }
  std::vector<Segment> out;
  for (std::size_t start : window_starts(signal.samples.size(), kSegmentLength, overlap, anchor)) {
    Segment seg;
    seg.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(start),
                       signal.samples.begin() + static_cast<std::ptrdiff_t>(start + kSegmentLength));
    seg.subject_id = signal.subject_id;
    seg.start_time_s = static_cast<double>(start) / signal.rate_hz;
    seg.role = role;
    seg.kind = kind;
    seg.site = signal.site;
    out.push_back(std::move(seg));
  }
  return out;
}

SubjectSplit split_by_subject(std::vector<Segment> segments, double train_fraction,
                              std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  std::set<std::string> unique;
  for (const auto& s : segments) unique.insert(s.subject_id);
  if (unique.size() < 2) throw ConfigError("subject-wise split needs at least 2 subjects");
  std::vector<std::string> subjects(unique.begin(), unique.end());
  Rng rng(derive_seed(seed, {0x5917}));
  std::shuffle(subjects.begin(), subjects.end(), rng);
  const auto n = subjects.size();
  auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  std::set<std::string> train_ids(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(n_train));

  SubjectSplit split;
  for (auto& s : segments) {
    if (train_ids.count(s.subject_id)) {
      s.role = Role::train;
      split.train.push_back(std::move(s));
    } else {
      s.role = Role::val;
      split.val.push_back(std::move(s));
    }
  }
  return split;
}

}  // namespace edakd::signal
