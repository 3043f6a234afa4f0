#include "edakd/evaluate/loso.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "edakd/errors.hpp"
#include "edakd/evaluate/roc.hpp"
#include "edakd/parallel.hpp"
#include "edakd/signal/io.hpp"

namespace edakd::evaluate {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ConfigError("quantile of an empty set");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

CohortResult loso_evaluate(const std::vector<ScoredRecording>& recordings, double target, int jobs) {
  std::map<std::string, std::vector<const ScoredRecording*>> by_subject;
  for (const auto& r : recordings) {
    if (r.baseline_scores.size() != kBaselineSegments || r.event_scores.size() != kEventSegments ||
        r.event_end_times_s.size() != kEventSegments) {
      throw ConfigError("recording " + r.subject_id + "/" + r.recording_id +
                        " needs 6 baseline and 15 event segments");
    }
    by_subject[r.subject_id].push_back(&r);
  }
  if (by_subject.size() < 2) throw ConfigError("LOSO needs at least two subjects");

  std::vector<std::string> ids;
  for (const auto& [id, _] : by_subject) ids.push_back(id);

  CohortResult result;
  result.subjects.resize(ids.size());
  result.folds.resize(ids.size());
  std::vector<std::vector<RecordingOutcome>> outcomes(ids.size());

  parallel_for(ids.size(), jobs, [&](std::size_t s) {
    const std::string& held = ids[s];
    FoldAudit& audit = result.folds[s];
    audit.held_out = held;
    std::vector<double> train_scores;
    for (const auto& [id, recs] : by_subject) {
      if (id == held) continue;
      audit.threshold_subjects.push_back(id);
      for (const auto* r : recs) {
        train_scores.insert(train_scores.end(), r->baseline_scores.begin(), r->baseline_scores.end());
      }
    }
    const double t = select_threshold(train_scores, target);
    audit.threshold = t;
    audit.threshold_scores = train_scores.size();
    audit.train_specificity = specificity_at(train_scores, t);

    SubjectResult& sr = result.subjects[s];
    sr.subject_id = held;
    sr.threshold = t;
    sr.train_specificity = audit.train_specificity;
    std::vector<double> pos, neg, leads;
    for (const auto* r : by_subject.at(held)) {
      RecordingOutcome o;
      o.subject_id = r->subject_id;
      o.recording_id = r->recording_id;
      for (double v : r->baseline_scores) o.baseline_flags.push_back(v >= t);
      for (double v : r->event_scores) o.event_flags.push_back(v >= t);
      const auto first = std::find(o.event_flags.begin(), o.event_flags.end(), true);
      o.sensitivity = first != o.event_flags.end() ? 1.0 : 0.0;
      o.specificity =
          std::none_of(o.baseline_flags.begin(), o.baseline_flags.end(), [](bool b) { return b; })
              ? 1.0
              : 0.0;
      o.accuracy = 0.5 * (o.sensitivity + o.specificity);
      if (first != o.event_flags.end()) {
        const auto k = static_cast<std::size_t>(first - o.event_flags.begin());
        o.lead_time_s = r->onset_time_s - r->event_end_times_s[k];
        leads.push_back(*o.lead_time_s);
      }
      pos.insert(pos.end(), r->event_scores.begin(), r->event_scores.end());
      neg.insert(neg.end(), r->baseline_scores.begin(), r->baseline_scores.end());
      sr.sensitivity += o.sensitivity;
      sr.specificity += o.specificity;
      sr.accuracy += o.accuracy;
      ++sr.recordings;
      outcomes[s].push_back(std::move(o));
    }
    const double nr = static_cast<double>(sr.recordings);
    sr.sensitivity /= nr;
    sr.specificity /= nr;
    sr.accuracy /= nr;
    sr.auroc = auroc(pos, neg);
    if (!leads.empty()) {
      double sum = 0.0;
      for (double l : leads) sum += l;
      sr.mean_lead_time_s = sum / static_cast<double>(leads.size());
    }
  });

  std::vector<double> subject_leads;
  for (std::size_t s = 0; s < ids.size(); ++s) {
    const auto& sr = result.subjects[s];
    result.macro_auroc += sr.auroc;
    result.macro_sensitivity += sr.sensitivity;
    result.macro_specificity += sr.specificity;
    result.macro_accuracy += sr.accuracy;
    if (sr.mean_lead_time_s) subject_leads.push_back(*sr.mean_lead_time_s);
    for (auto& o : outcomes[s]) result.recordings.push_back(std::move(o));
  }
  const double ns = static_cast<double>(ids.size());
  result.macro_auroc /= ns;
  result.macro_sensitivity /= ns;
  result.macro_specificity /= ns;
  result.macro_accuracy /= ns;
  result.lead_time.subjects = subject_leads.size();
  if (!subject_leads.empty()) {
    result.lead_time.median_s = quantile(subject_leads, 0.5);
    result.lead_time.q1_s = quantile(subject_leads, 0.25);
    result.lead_time.q3_s = quantile(subject_leads, 0.75);
  }
  return result;
}

namespace {

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json cohort_result_to_json(const CohortResult& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json macro;
  macro["auroc"] = r.macro_auroc;
  macro["sensitivity"] = r.macro_sensitivity;
  macro["specificity"] = r.macro_specificity;
  macro["accuracy"] = r.macro_accuracy;
  j["macro"] = std::move(macro);
  nlohmann::ordered_json lead;
  lead["subjects"] = r.lead_time.subjects;
  lead["median_min"] = r.lead_time.median_s ? nlohmann::ordered_json(*r.lead_time.median_s / 60.0)
                                            : nlohmann::ordered_json(nullptr);
  lead["q1_min"] = r.lead_time.q1_s ? nlohmann::ordered_json(*r.lead_time.q1_s / 60.0)
                                    : nlohmann::ordered_json(nullptr);
  lead["q3_min"] = r.lead_time.q3_s ? nlohmann::ordered_json(*r.lead_time.q3_s / 60.0)
                                    : nlohmann::ordered_json(nullptr);
  j["lead_time"] = std::move(lead);
  auto subjects = nlohmann::ordered_json::array();
  for (const auto& s : r.subjects) {
    nlohmann::ordered_json o;
    o["subject_id"] = s.subject_id;
    o["recordings"] = s.recordings;
    o["threshold"] = s.threshold;
    o["train_specificity"] = s.train_specificity;
    o["auroc"] = s.auroc;
    o["sensitivity"] = s.sensitivity;
    o["specificity"] = s.specificity;
    o["accuracy"] = s.accuracy;
    o["mean_lead_time_s"] = optional_json(s.mean_lead_time_s);
    subjects.push_back(std::move(o));
  }
  j["subjects"] = std::move(subjects);
  return j;
}

std::string cohort_result_csv(const CohortResult& r, const std::string& method) {
  std::string out;
  auto num = [](double v) { return signal::format_double(v); };
  for (const auto& s : r.subjects) {
    out += method + "," + s.subject_id + "," + num(s.auroc) + "," + num(s.sensitivity) + "," +
           num(s.specificity) + "," + num(s.accuracy) + "," + num(s.threshold) + "," +
           (s.mean_lead_time_s ? num(*s.mean_lead_time_s) : std::string()) + "\n";
  }
  out += method + ",macro," + num(r.macro_auroc) + "," + num(r.macro_sensitivity) + "," +
         num(r.macro_specificity) + "," + num(r.macro_accuracy) + ",," +
         (r.lead_time.median_s ? num(*r.lead_time.median_s) : std::string()) + "\n";
  return out;
}

std::vector<nlohmann::ordered_json> fold_audit_rows(const CohortResult& r, const std::string& method) {
  std::vector<nlohmann::ordered_json> rows;
  for (const auto& f : r.folds) {
    nlohmann::ordered_json j;
    j["method"] = method;
    j["held_out"] = f.held_out;
    j["threshold_subjects"] = f.threshold_subjects;
    j["held_out_in_threshold_fold"] =
        std::find(f.threshold_subjects.begin(), f.threshold_subjects.end(), f.held_out) !=
        f.threshold_subjects.end();
    j["threshold_scores"] = f.threshold_scores;
    j["threshold"] = f.threshold;
    j["train_specificity"] = f.train_specificity;
    rows.push_back(std::move(j));
  }
  return rows;
}

}  // namespace edakd::evaluate
