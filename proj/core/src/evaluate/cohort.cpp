#include "edakd/evaluate/cohort.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "edakd/errors.hpp"
#include "edakd/evaluate/phasic.hpp"
#include "edakd/parallel.hpp"
#include "edakd/rng.hpp"
#include "edakd/signal/io.hpp"
#include "edakd/signal/synth.hpp"

namespace edakd::evaluate {

std::string_view to_string(Phase phase) { return phase == Phase::baseline ? "baseline" : "event"; }

Phase parse_phase(std::string_view text) {
  if (text == "baseline") return Phase::baseline;
  if (text == "event") return Phase::event;
  throw FormatError("unknown phase '" + std::string(text) + "'");
}

void CohortSpec::validate() const {
  if (subjects < 2) throw ConfigError("cohort needs at least two subjects");
  if (recordings_per_subject < 1) throw ConfigError("cohort needs at least one recording per subject");
  if (baseline_s <= 0.0 || event_s <= 0.0) throw ConfigError("cohort periods must be positive");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
  if (baseline_scr_rate_per_min < 0.0 || event_scr_rate_per_min < 0.0) {
    throw ConfigError("SCR rates must be non-negative");
  }
  if (baseline_scr_amp <= 0.0 || event_scr_amp <= 0.0 || scr_amp_log_sigma < 0.0) {
    throw ConfigError("SCR amplitudes must be positive");
  }
  if (!(tonic_low < tonic_high) || tonic_half_width <= 0.0 || tonic_knot_interval_s <= 0.0) {
    throw ConfigError("invalid tonic settings");
  }
}

namespace {

void poisson_onsets(Rng& rng, double from_s, double to_s, double rate_per_min, double amp_median,
                    double amp_sigma, std::vector<double>& onsets, std::vector<double>& amps) {
  if (rate_per_min <= 0.0) return;
  std::exponential_distribution<double> gap(rate_per_min / 60.0);
  std::lognormal_distribution<double> amp(std::log(amp_median), amp_sigma);
  for (double t = from_s + gap(rng); t < to_s; t += gap(rng)) {
    onsets.push_back(t);
    amps.push_back(amp(rng));
  }
}

std::vector<CohortSegment> cut(const std::vector<double>& samples, std::size_t offset,
                               std::size_t count, double overlap, signal::WindowAnchor anchor,
                               const std::string& subject) {
  const double rate = signal::kSegmentRateHz;
  std::vector<CohortSegment> out;
  for (std::size_t s : signal::window_starts(count, signal::kSegmentLength, overlap, anchor)) {
    CohortSegment cs;
    const auto first = samples.begin() + static_cast<std::ptrdiff_t>(offset + s);
    cs.segment.samples.assign(first, first + static_cast<std::ptrdiff_t>(signal::kSegmentLength));
    cs.segment.subject_id = subject;
    cs.segment.start_time_s = static_cast<double>(offset + s) / rate;
    cs.segment.role = signal::Role::test;
    cs.segment.kind = signal::SegmentKind::clean_target;
    cs.clean = cs.segment.samples;
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace

std::vector<CohortRecording> synthesize_cohort(const CohortSpec& spec) {
  spec.validate();
  const double rate = signal::kSegmentRateHz;
  const auto n_base = static_cast<std::size_t>(std::llround(spec.baseline_s * rate));
  const auto n_event = static_cast<std::size_t>(std::llround(spec.event_s * rate));
  std::vector<CohortRecording> out;
  for (std::size_t s = 0; s < spec.subjects; ++s) {
    char sid[16];
    std::snprintf(sid, sizeof sid, "C%02zu", s + 1);
    for (std::size_t r = 0; r < spec.recordings_per_subject; ++r) {
      Rng rng(derive_seed(spec.seed, {0xc0407, s, r}));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double center = spec.tonic_low + spec.tonic_half_width +
                            unit(rng) * (spec.tonic_high - spec.tonic_low - 2.0 * spec.tonic_half_width);
      signal::SynthConfig tc;
      tc.duration_s = spec.baseline_s + spec.event_s;
      tc.tonic_low = center - spec.tonic_half_width;
      tc.tonic_high = center + spec.tonic_half_width;
      tc.tonic_knot_interval_s = spec.tonic_knot_interval_s;
      tc.scr_rate_per_min = 0.0;
      tc.seed = rng();
      const auto tonic = signal::synthesize_eda_components(tc).tonic;

      std::vector<double> onsets, amps;
      poisson_onsets(rng, 0.0, spec.baseline_s, spec.baseline_scr_rate_per_min,
                     spec.baseline_scr_amp, spec.scr_amp_log_sigma, onsets, amps);
      poisson_onsets(rng, spec.baseline_s, spec.baseline_s + spec.event_s,
                     spec.event_scr_rate_per_min, spec.event_scr_amp, spec.scr_amp_log_sigma,
                     onsets, amps);
      const auto phasic = signal::render_scrs(tonic.size(), rate, 0.0, onsets, amps, tc.rise_tau_s,
                                              tc.decay_tau_s);
      std::vector<double> x(tonic.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = tonic[i] + phasic[i];

      CohortRecording rec;
      rec.subject_id = sid;
      rec.recording_id = "R" + std::to_string(r + 1);
      rec.onset_time_s = static_cast<double>(n_base + n_event) / rate;
      rec.baseline = cut(x, 0, n_base, spec.overlap, signal::WindowAnchor::start, sid);
      rec.event = cut(x, n_base, n_event, spec.overlap, signal::WindowAnchor::end, sid);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

void inject_cohort_noise(std::vector<CohortRecording>& cohort, const augment::MaBank& bank,
                         const augment::AugmentRanges& ranges, std::uint64_t seed, int jobs) {
  std::vector<CohortSegment*> all;
  for (auto& r : cohort) {
    for (auto& s : r.baseline) all.push_back(&s);
    for (auto& s : r.event) all.push_back(&s);
  }
  parallel_for(all.size(), jobs, [&](std::size_t i) {
    CohortSegment& cs = *all[i];
    if (cs.clean.empty()) cs.clean = cs.segment.samples;
    const auto plan = augment::sample_plan(ranges, bank.size(), derive_seed(seed, {0x4015e, i}));
    cs.segment.samples = augment::corrupt(cs.clean, plan, bank).input;
    cs.segment.kind = signal::SegmentKind::real_noisy;
  });
}

void write_cohort_jsonl(const std::filesystem::path& path, const std::vector<CohortRecording>& cohort) {
  std::vector<signal::OrderedJson> rows;
  auto emit = [&](const CohortRecording& r, const CohortSegment& s, Phase phase) {
    auto j = signal::segment_to_json(s.segment);
    j["role"] = std::string(signal::to_string(s.segment.role));
    j["recording_id"] = r.recording_id;
    j["phase"] = std::string(to_string(phase));
    j["onset_time_s"] = r.onset_time_s;
    if (!s.clean.empty()) j["clean_samples"] = s.clean;
    rows.push_back(std::move(j));
  };
  for (const auto& r : cohort) {
    for (const auto& s : r.baseline) emit(r, s, Phase::baseline);
    for (const auto& s : r.event) emit(r, s, Phase::event);
  }
  signal::write_jsonl(path, rows);
}

std::vector<CohortRecording> read_cohort_jsonl(const std::filesystem::path& path) {
  std::map<std::pair<std::string, std::string>, CohortRecording> recs;
  signal::for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    CohortSegment cs;
    cs.segment = signal::segment_from_json(j);
    const std::string rid = j.at("recording_id").get<std::string>();
    const Phase phase = parse_phase(j.at("phase").get<std::string>());
    const double onset = j.at("onset_time_s").get<double>();
    if (j.contains("clean_samples")) {
      cs.clean = j.at("clean_samples").get<std::vector<double>>();
      if (cs.clean.size() != cs.segment.samples.size()) {
        throw FormatError("clean_samples length differs from samples");
      }
    }
    auto& rec = recs[{cs.segment.subject_id, rid}];
    if (rec.subject_id.empty()) {
      rec.subject_id = cs.segment.subject_id;
      rec.recording_id = rid;
      rec.onset_time_s = onset;
    } else if (rec.onset_time_s != onset) {
      throw FormatError("onset_time_s differs within recording " + rid);
    }
    (phase == Phase::baseline ? rec.baseline : rec.event).push_back(std::move(cs));
  });
  std::vector<CohortRecording> out;
  for (auto& [key, rec] : recs) {
    if (rec.baseline.size() != kBaselineSegments || rec.event.size() != kEventSegments) {
      throw FormatError(path.string() + ": recording " + rec.subject_id + "/" + rec.recording_id +
                        " has " + std::to_string(rec.baseline.size()) + " baseline and " +
                        std::to_string(rec.event.size()) + " event segments (need 6 and 15)");
    }
    out.push_back(std::move(rec));
  }
  if (out.empty()) throw FormatError(path.string() + ": cohort file holds no recordings");
  return out;
}

std::vector<ScoredRecording> score_cohort(const std::vector<CohortRecording>& cohort,
                                          const Denoiser& denoiser, int jobs) {
  struct Job {
    std::size_t rec;
    bool event;
    std::size_t idx;
  };
  std::vector<Job> work;
  std::vector<ScoredRecording> out(cohort.size());
  for (std::size_t r = 0; r < cohort.size(); ++r) {
    const auto& c = cohort[r];
    auto& s = out[r];
    s.subject_id = c.subject_id;
    s.recording_id = c.recording_id;
    s.onset_time_s = c.onset_time_s;
    s.baseline_scores.resize(c.baseline.size());
    s.event_scores.resize(c.event.size());
    for (const auto& e : c.event) {
      s.event_end_times_s.push_back(e.segment.start_time_s +
                                    static_cast<double>(e.segment.samples.size()) / signal::kSegmentRateHz);
    }
    for (std::size_t i = 0; i < c.baseline.size(); ++i) work.push_back({r, false, i});
    for (std::size_t i = 0; i < c.event.size(); ++i) work.push_back({r, true, i});
  }
  parallel_for(work.size(), jobs, [&](std::size_t w) {
    const Job& jb = work[w];
    const auto& seg = (jb.event ? cohort[jb.rec].event : cohort[jb.rec].baseline)[jb.idx];
    const auto& x = seg.segment.samples;
    const double score = denoiser ? score_segment(denoiser(x)) : score_segment(x);
    (jb.event ? out[jb.rec].event_scores : out[jb.rec].baseline_scores)[jb.idx] = score;
  });
  return out;
}

std::vector<ScoredRecording> null_cohort(std::size_t subjects, std::size_t recordings,
                                         std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0x2e11}));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredRecording> out;
  for (std::size_t s = 0; s < subjects; ++s) {
    for (std::size_t r = 0; r < recordings; ++r) {
      ScoredRecording rec;
      rec.subject_id = "N" + std::to_string(s + 1);
      rec.recording_id = "R" + std::to_string(r + 1);
      rec.onset_time_s = 900.0;
      for (std::size_t i = 0; i < kBaselineSegments; ++i) rec.baseline_scores.push_back(u(rng));
      for (std::size_t i = 0; i < kEventSegments; ++i) {
        rec.event_scores.push_back(u(rng));
        rec.event_end_times_s.push_back(300.0 + 24.0 + 128.0 + 32.0 * static_cast<double>(i));
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace edakd::evaluate
