#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "edakd/rng.hpp"

namespace edakd::augment {

/// Upper saturation: samples above the (1-p) quantile are set to it. The
/// threshold is the order statistic leaving ceil(p*n) samples above it.
std::vector<double> clip_upper(std::span<const double> x, double p);
double clip_threshold(std::span<const double> x, double p);

/// Tapered spike shape over `width` samples with peak exactly 1.
std::vector<double> impulse_taper(std::size_t width);

struct Impulse {
  std::size_t position = 0;  // first sample of the support
  double sign = 1.0;
};

/// Adds spikes of height amp_scale * std(x) at the given positions.
std::vector<double> apply_impulses(std::span<const double> x, double amp_scale, std::size_t width,
                                   std::span<const Impulse> impulses);
/// Draws `count` disjoint, non-adjacent spike positions and random signs.
std::vector<Impulse> draw_impulses(std::size_t length, std::size_t count, std::size_t width,
                                   Rng& rng);
std::vector<double> add_impulses(std::span<const double> x, double amp_scale, std::size_t count,
                                 std::size_t width, Rng& rng);

struct ShearStep {
  std::size_t cut = 0;  // first sample carrying the new offset
  double offset = 0.0;
};

/// Adds cumulative step offsets: every sample at or after a cut is moved by
/// that step's offset.
std::vector<double> apply_shear(std::span<const double> x, std::span<const ShearStep> steps);
/// `count` distinct cut points in [1, n-1]; offsets uniform in [0, max-min]
/// (floored at the sigma floor for flat input) with random sign.
std::vector<ShearStep> draw_shear(std::span<const double> x, std::size_t count, Rng& rng);
std::vector<double> shear(std::span<const double> x, std::size_t count, Rng& rng);

}  // namespace edakd::augment
