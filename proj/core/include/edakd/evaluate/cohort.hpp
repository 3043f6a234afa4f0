#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "edakd/augment/plan.hpp"
#include "edakd/evaluate/loso.hpp"
#include "edakd/signal/segment.hpp"

namespace edakd::evaluate {

enum class Phase { baseline, event };
std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view text);

struct CohortSegment {
  signal::Segment segment;    // model input (possibly corrupted)
  std::vector<double> clean;  // ground truth when known, else empty
};

/// One recording: a baseline period followed by the window that ends at event
/// onset. Segment start times and onset share the recording's time origin.
struct CohortRecording {
  std::string subject_id;
  std::string recording_id;
  double onset_time_s = 0.0;
  std::vector<CohortSegment> baseline;
  std::vector<CohortSegment> event;
};

struct CohortSpec {
  std::size_t subjects = 12;
  std::size_t recordings_per_subject = 2;
  double baseline_s = 300.0;
  double event_s = 600.0;
  double overlap = 0.75;
  // Sparse, small responses at baseline; frequent, large ones before onset.
  double baseline_scr_rate_per_min = 0.5;
  double baseline_scr_amp = 0.03;  // μS, lognormal median
  double event_scr_rate_per_min = 4.0;
  double event_scr_amp = 0.5;
  double scr_amp_log_sigma = 0.3;
  double tonic_low = 2.0;
  double tonic_high = 8.0;
  double tonic_half_width = 0.5;  // per-recording tonic wander (μS)
  double tonic_knot_interval_s = 60.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Baseline windows are start-anchored; event windows are end-anchored so the
/// last one ends at onset.
std::vector<CohortRecording> synthesize_cohort(const CohortSpec& spec);

/// Corrupts every segment with a fixed per-segment plan, keeping the clean copy.
void inject_cohort_noise(std::vector<CohortRecording>& cohort, const augment::MaBank& bank,
                         const augment::AugmentRanges& ranges, std::uint64_t seed, int jobs = 1);

/// Segment records with recording_id, phase, onset_time_s and clean_samples.
void write_cohort_jsonl(const std::filesystem::path& path,
                        const std::vector<CohortRecording>& cohort);
/// Throws FormatError with the offending line number.
std::vector<CohortRecording> read_cohort_jsonl(const std::filesystem::path& path);

using Denoiser = std::function<std::vector<double>(std::span<const double>)>;

/// Scores each segment's (optionally denoised) input with score_segment.
std::vector<ScoredRecording> score_cohort(const std::vector<CohortRecording>& cohort,
                                          const Denoiser& denoiser, int jobs = 1);

/// Recordings whose baseline and event scores are i.i.d. uniform draws.
std::vector<ScoredRecording> null_cohort(std::size_t subjects, std::size_t recordings_per_subject,
                                         std::uint64_t seed);

}  // namespace edakd::evaluate
