#pragma once

#include <span>

namespace edakd::evaluate {

/// Added to the largest score when no observed score reaches the target.
inline constexpr double kTieEpsilon = 1e-9;

/// Mann-Whitney AUROC: P(pos > neg) + 0.5 * P(pos == neg).
double auroc(std::span<const double> positives, std::span<const double> negatives);

/// Smallest observed score t with fraction(scores < t) >= target_specificity,
/// or max(scores) + kTieEpsilon when none qualifies. Positive iff score >= t.
double select_threshold(std::span<const double> baseline_scores, double target_specificity = 0.90);

/// Fraction of scores strictly below t.
double specificity_at(std::span<const double> baseline_scores, double threshold);

}  // namespace edakd::evaluate
