#include "edakd/augment/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "edakd/errors.hpp"
#include "edakd/signal/segment.hpp"

namespace edakd::augment {

double clip_threshold(std::span<const double> x, double p) {
  if (x.empty()) throw ShapeError("clip_upper on empty input");
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("clipping fraction must lie in [0, 1)");
  const std::size_t n = x.size();
  auto above = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
  above = std::min(above, n - 1);
  std::vector<double> sorted(x.begin(), x.end());
  const std::size_t k = n - above - 1;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  return sorted[k];
}

std::vector<double> clip_upper(std::span<const double> x, double p) {
  const double t = clip_threshold(x, p);
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v = std::min(v, t);
  return out;
}

std::vector<double> impulse_taper(std::size_t width) {
  if (width == 0) throw ConfigError("impulse width must be positive");
  std::vector<double> w(width);
  for (std::size_t k = 0; k < width; ++k) {
    w[k] = std::sin(std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(width + 1));
  }
  const double peak = *std::max_element(w.begin(), w.end());
  for (double& v : w) v /= peak;
  // Odd widths hit the crest exactly; pin it against rounding in sin().
  if (width % 2 == 1) w[width / 2] = 1.0;
  return w;
}

std::vector<double> apply_impulses(std::span<const double> x, double amp_scale, std::size_t width,
                                   std::span<const Impulse> impulses) {
  const double height = amp_scale * std::max(signal::stddev(x), signal::kSigmaFloor);
  const auto taper = impulse_taper(width);
  std::vector<double> out(x.begin(), x.end());
  for (const auto& imp : impulses) {
    if (imp.position + width > out.size()) throw ShapeError("impulse extends past segment end");
    for (std::size_t k = 0; k < width; ++k) out[imp.position + k] += imp.sign * height * taper[k];
  }
  return out;
}

std::vector<Impulse> draw_impulses(std::size_t length, std::size_t count, std::size_t width,
                                   Rng& rng) {
  if (width == 0 || count == 0) return {};
  // Each spike plus a one-sample guard must fit.
  if (count * (width + 1) > length + 1) throw ConfigError("impulses do not fit in the segment");
  std::uniform_int_distribution<std::size_t> pos(0, length - width);
  std::bernoulli_distribution coin(0.5);
  std::vector<Impulse> picked;
  auto clashes = [&](std::size_t p) {
    for (const auto& q : picked) {
      // Require at least one untouched sample between supports.
      if (p < q.position + width + 1 && q.position < p + width + 1) return true;
    }
    return false;
  };
  for (int attempt = 0; picked.size() < count && attempt < 10000; ++attempt) {
    const std::size_t p = pos(rng);
    if (!clashes(p)) picked.push_back({p, coin(rng) ? 1.0 : -1.0});
  }
  if (picked.size() < count) {
    // Deterministic fallback: evenly spaced.
    picked.clear();
    const std::size_t stride = length / count;
    for (std::size_t i = 0; i < count; ++i) picked.push_back({i * stride, coin(rng) ? 1.0 : -1.0});
  }
  std::sort(picked.begin(), picked.end(),
            [](const Impulse& a, const Impulse& b) { return a.position < b.position; });
  return picked;
}

std::vector<double> add_impulses(std::span<const double> x, double amp_scale, std::size_t count,
                                 std::size_t width, Rng& rng) {
  const auto imps = draw_impulses(x.size(), count, width, rng);
  return apply_impulses(x, amp_scale, width, imps);
}

std::vector<double> apply_shear(std::span<const double> x, std::span<const ShearStep> steps) {
  std::vector<double> out(x.begin(), x.end());
  for (const auto& s : steps) {
    if (s.cut >= out.size()) throw ShapeError("shear cut point past segment end");
    for (std::size_t i = s.cut; i < out.size(); ++i) out[i] += s.offset;
  }
  return out;
}

std::vector<ShearStep> draw_shear(std::span<const double> x, std::size_t count, Rng& rng) {
  if (x.size() < 2 || count == 0) return {};
  if (count > x.size() - 1) throw ConfigError("more shear cuts than sample boundaries");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double range = std::max(*hi - *lo, signal::kSigmaFloor);
  std::uniform_int_distribution<std::size_t> cut(1, x.size() - 1);
  std::uniform_real_distribution<double> mag(0.0, range);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> cuts;
  while (cuts.size() < count) {
    const std::size_t c = cut(rng);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<ShearStep> steps;
  for (std::size_t c : cuts) {
    const double m = mag(rng);
    steps.push_back({c, coin(rng) ? m : -m});
  }
  return steps;
}

std::vector<double> shear(std::span<const double> x, std::size_t count, Rng& rng) {
  const auto steps = draw_shear(x, count, rng);
  return apply_shear(x, steps);
}

}  // namespace edakd::augment
