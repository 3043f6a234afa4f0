#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace edakd::evaluate {

inline constexpr std::size_t kBaselineSegments = 6;
inline constexpr std::size_t kEventSegments = 15;

/// Risk scores of one recording: 6 baseline segments and 15 segments from the
/// window preceding event onset. Times share one origin.
struct ScoredRecording {
  std::string subject_id;
  std::string recording_id;
  std::vector<double> baseline_scores;
  std::vector<double> event_scores;
  std::vector<double> event_end_times_s;
  double onset_time_s = 0.0;
};

struct RecordingOutcome {
  std::string subject_id;
  std::string recording_id;
  std::vector<bool> baseline_flags;
  std::vector<bool> event_flags;
  std::optional<double> lead_time_s;  // onset - end of first flagged event segment
  double sensitivity = 0.0;           // 1 iff any event segment flagged
  double specificity = 0.0;           // 1 iff no baseline segment flagged
  double accuracy = 0.0;
};

struct SubjectResult {
  std::string subject_id;
  std::size_t recordings = 0;
  double threshold = 0.0;
  double train_specificity = 0.0;  // on the other subjects' baseline scores
  double auroc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double accuracy = 0.0;
  std::optional<double> mean_lead_time_s;
};

/// Bookkeeping for one LOSO fold.
struct FoldAudit {
  std::string held_out;
  std::vector<std::string> threshold_subjects;
  std::size_t threshold_scores = 0;
  double threshold = 0.0;
  double train_specificity = 0.0;
};

struct LeadTimeSummary {
  std::size_t subjects = 0;
  std::optional<double> median_s, q1_s, q3_s;
};

struct CohortResult {
  std::vector<SubjectResult> subjects;  // sorted by subject id
  std::vector<RecordingOutcome> recordings;
  std::vector<FoldAudit> folds;
  double macro_auroc = 0.0;
  double macro_sensitivity = 0.0;
  double macro_specificity = 0.0;
  double macro_accuracy = 0.0;
  LeadTimeSummary lead_time;
};

/// Linear interpolation between closest ranks (q in [0, 1]).
double quantile(std::vector<double> values, double q);

/// Leave-one-subject-out: each subject's threshold comes from every other
/// subject's baseline scores. Throws ConfigError with fewer than two subjects
/// or when a recording lacks 6 baseline / 15 event scores.
CohortResult loso_evaluate(const std::vector<ScoredRecording>& recordings,
                           double target_specificity = 0.90, int jobs = 1);

nlohmann::ordered_json cohort_result_to_json(const CohortResult& result);
/// One row per subject plus a macro row.
std::string cohort_result_csv(const CohortResult& result, const std::string& method);
/// One JSON object per fold.
std::vector<nlohmann::ordered_json> fold_audit_rows(const CohortResult& result,
                                                    const std::string& method);

}  // namespace edakd::evaluate
