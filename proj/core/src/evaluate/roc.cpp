#include "edakd/evaluate/roc.hpp"

#include <algorithm>
#include <vector>

#include "edakd/errors.hpp"

namespace edakd::evaluate {

double auroc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw ConfigError("AUROC needs positive and negative scores");
  std::vector<double> n(neg.begin(), neg.end());
  std::sort(n.begin(), n.end());
  double credit = 0.0;
  for (double p : pos) {
    const auto lo = std::lower_bound(n.begin(), n.end(), p);
    const auto hi = std::upper_bound(lo, n.end(), p);
    credit += static_cast<double>(lo - n.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return credit / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double specificity_at(std::span<const double> scores, double t) {
  if (scores.empty()) throw ConfigError("specificity of an empty score set");
  const auto below = std::count_if(scores.begin(), scores.end(), [t](double s) { return s < t; });
  return static_cast<double>(below) / static_cast<double>(scores.size());
}

double select_threshold(std::span<const double> scores, double target) {
  if (scores.empty()) throw ConfigError("threshold selection needs a non-empty training fold");
  std::vector<double> s(scores.begin(), scores.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0 && s[i] == s[i - 1]) continue;
    // i values lie strictly below s[i].
    if (static_cast<double>(i) / n >= target) return s[i];
  }
  return s.back() + kTieEpsilon;
}

}  // namespace edakd::evaluate
