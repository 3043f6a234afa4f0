#pragma once

#include <span>
#include <vector>

namespace edakd::evaluate {

inline constexpr std::size_t kMedianWindow = 32;   // 8 s at 4 Hz
inline constexpr std::size_t kAverageWindow = 16;  // 4 s at 4 Hz

/// Trailing moving median; samples before the start are replicated from x[0].
std::vector<double> moving_median(std::span<const double> x, std::size_t window);
/// Trailing moving average with the same edge rule.
std::vector<double> moving_average(std::span<const double> x, std::size_t window);

/// Tonic estimate: moving median (8 s) followed by moving average (4 s).
/// Both windows trail the current sample, so a response's rise is measured
/// against the level that preceded it.
std::vector<double> tonic_estimate(std::span<const double> x);
/// max(x - tonic, 0).
std::vector<double> phasic_extract(std::span<const double> x);
/// Peak phasic amplitude (μS), never negative.
double score_segment(std::span<const double> x);

}  // namespace edakd::evaluate
