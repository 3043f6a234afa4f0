#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "commands.hpp"
#include "edakd/augment/batch.hpp"
#include "edakd/augment/noise.hpp"
#include "edakd/errors.hpp"
#include "edakd/evaluate/cohort.hpp"
#include "edakd/parallel.hpp"
#include "edakd/rng.hpp"
#include "edakd/signal/dataset.hpp"
#include "edakd/signal/io.hpp"
#include "output.hpp"

namespace edakd::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Seed streams of the synth command.
enum : std::uint64_t { kDataStream = 1, kBankStream = 2, kCohortStream = 3, kCohortNoiseStream = 4 };

std::vector<std::string> subject_ids(const std::vector<signal::Segment>& segments) {
  std::vector<std::string> ids;
  for (const auto& s : segments) {
    if (ids.empty() || ids.back() != s.subject_id) ids.push_back(s.subject_id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

int cmd_synth(const Globals& g, const SynthOptions& o) {
  const auto& cfg = g.config;
  signal::DatasetSpec spec;
  spec.base = cfg.synth();
  spec.recording_s = o.duration_s.value_or(cfg.real("data.recording_s", spec.recording_s));
  spec.overlap = o.overlap.value_or(cfg.real("data.overlap", spec.overlap));
  spec.train_fraction = cfg.real("data.train_fraction", spec.train_fraction);
  spec.seed = derive_seed(g.seed, {kDataStream});
  const std::size_t subjects = o.subjects.value_or(cfg.size("data.subjects", 20));
  const std::size_t want_train = o.train_segments.value_or(cfg.size("data.train_segments", 0));
  const std::size_t want_val = o.val_segments.value_or(cfg.size("data.val_segments", 0));
  if ((want_train == 0) != (want_val == 0)) {
    throw ConfigError("train and val segment counts must be given together");
  }
  if (!(spec.overlap >= 0.0 && spec.overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");

  signal::SubjectSplit split;
  std::size_t windows_per_recording = 0;
  std::size_t used_subjects = subjects;
  if (want_train > 0) {
    spec.train_segments = want_train;
    spec.val_segments = want_val;
    split = signal::make_synthetic_dataset(spec);
    used_subjects = subject_ids(split.train).size() + subject_ids(split.val).size();
  } else {
    signal::CohortSynthSpec cs{subjects, spec.recording_s, spec.base, spec.seed};
    std::vector<signal::Segment> segments;
    for (const auto& raw : signal::synthesize_subjects(cs)) {
      const auto sig = raw.rate_hz == signal::kSegmentRateHz ? raw : signal::downsample(raw, signal::kSegmentRateHz);
      auto w = signal::window(sig, spec.overlap);
      windows_per_recording = w.size();
      for (auto& s : w) segments.push_back(std::move(s));
    }
    if (segments.empty()) throw ConfigError("recordings are shorter than one 128 s segment");
    split = signal::split_by_subject(std::move(segments), spec.train_fraction, spec.seed);
  }

  const std::size_t bank_size = o.ma_bank.value_or(cfg.size("data.ma_bank_size", 60));
  const auto bank = augment::MaBank::synthesize(bank_size, derive_seed(g.seed, {kBankStream}));

  evaluate::CohortSpec cohort_spec;
  cohort_spec.subjects = o.cohort_subjects.value_or(cfg.size("cohort.subjects", cohort_spec.subjects));
  cohort_spec.recordings_per_subject = cfg.size("cohort.recordings_per_subject", cohort_spec.recordings_per_subject);
  cohort_spec.baseline_s = cfg.real("cohort.baseline_s", cohort_spec.baseline_s);
  cohort_spec.event_s = cfg.real("cohort.event_s", cohort_spec.event_s);
  cohort_spec.overlap = spec.overlap;
  cohort_spec.seed = derive_seed(g.seed, {kCohortStream});
  auto cohort = evaluate::synthesize_cohort(cohort_spec);
  evaluate::inject_cohort_noise(cohort, bank, cfg.ranges(), derive_seed(g.seed, {kCohortNoiseStream}), g.jobs);

  const fs::path dir = g.path(o.out);
  fs::create_directories(dir);
  signal::write_segments_jsonl(dir / "train.jsonl", split.train);
  signal::write_segments_jsonl(dir / "val.jsonl", split.val);
  bank.save_jsonl(dir / "ma_bank.jsonl");
  evaluate::write_cohort_jsonl(dir / "cohort.jsonl", cohort);

  std::size_t cohort_segments = 0;
  for (const auto& r : cohort) cohort_segments += r.baseline.size() + r.event.size();

  ordered_json j;
  j["seed"] = g.seed;
  j["subjects"] = used_subjects;
  j["recording_s"] = spec.recording_s;
  j["overlap"] = spec.overlap;
  j["windows_per_recording"] = windows_per_recording;
  j["train_segments"] = split.train.size();
  j["val_segments"] = split.val.size();
  j["train_subjects"] = subject_ids(split.train);
  j["val_subjects"] = subject_ids(split.val);
  j["ma_bank_entries"] = bank.size();
  j["cohort"] = {{"subjects", cohort_spec.subjects},
                 {"recordings", cohort.size()},
                 {"segments", cohort_segments}};
  j["files"] = {"train.jsonl", "val.jsonl", "ma_bank.jsonl", "cohort.jsonl", "synth_summary.json"};
  write_json(dir / "synth_summary.json", j);
  note("synth: " + std::to_string(split.train.size()) + " train / " + std::to_string(split.val.size()) +
       " val segments, " + std::to_string(cohort.size()) + " cohort recordings in " + dir.string());
  return 0;
}

int cmd_augment(const Globals& g, const AugmentOptions& o) {
  const auto segments = signal::read_segments_jsonl(g.path(o.input));
  const fs::path bank_path = g.path(o.bank);
  const auto bank = fs::exists(bank_path) ? augment::MaBank::load_jsonl(bank_path) : augment::MaBank{};
  const auto ranges = g.config.ranges();

  std::vector<ordered_json> records(segments.size()), plans(segments.size());
  std::vector<augment::AugmentationPlan> drawn(segments.size());
  parallel_for(segments.size(), g.jobs, [&](std::size_t i) {
    const auto& seg = segments[i];
    const auto plan = augment::sample_plan(
        ranges, bank.size(), augment::plan_seed(g.seed, 0, i, augment::AugmentMode::fixed));
    const auto pair = augment::corrupt(seg.samples, plan, bank);
    signal::Segment noisy = seg;
    noisy.samples = pair.input;
    noisy.kind = signal::SegmentKind::augmented_input;
    auto rec = signal::segment_to_json(noisy);
    rec["clean_samples"] = seg.samples;
    records[i] = std::move(rec);
    ordered_json p;
    p["index"] = i;
    p["subject_id"] = seg.subject_id;
    p["start_time_s"] = seg.start_time_s;
    p["plan"] = augment::plan_to_json(plan);
    plans[i] = std::move(p);
    drawn[i] = plan;
  });

  const fs::path out = g.path(o.output), plan_out = g.path(o.plans);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  if (plan_out.has_parent_path()) fs::create_directories(plan_out.parent_path());
  signal::write_jsonl(out, records);
  signal::write_jsonl(plan_out, plans);

  std::map<std::string, std::size_t> noise, distortion;
  for (const auto& p : drawn) {
    ++noise[std::string(augment::to_string(p.noise))];
    ++distortion[std::string(augment::to_string(p.distortion))];
  }
  ordered_json j;
  j["seed"] = g.seed;
  j["input"] = o.input.string();
  j["output"] = o.output.string();
  j["plans"] = o.plans.string();
  j["segments"] = segments.size();
  j["ma_bank_entries"] = bank.size();
  j["noise"] = noise;
  j["distortion"] = distortion;
  write_json(out.parent_path() / (out.stem().string() + "_summary.json"), j);
  note("augment: " + std::to_string(segments.size()) + " segments -> " + out.string());
  return 0;
}

}  // namespace edakd::cli
