#include "edakd/signal/dataset.hpp"

#include <utility>

#include "edakd/errors.hpp"

namespace edakd::signal {

namespace {

std::vector<Segment> thin(std::vector<Segment> segments, std::size_t count) {
  if (segments.size() == count) return segments;
  std::vector<Segment> out;
  out.reserve(count);
  const auto n = segments.size();
  for (std::size_t k = 0; k < count; ++k) out.push_back(std::move(segments[k * n / count]));
  return out;
}

}  // namespace

SubjectSplit make_synthetic_dataset(const DatasetSpec& spec) {
  if (spec.train_segments == 0 || spec.val_segments == 0) {
    throw ConfigError("dataset needs at least one train and one val segment");
  }
  constexpr std::size_t kMaxSubjects = 4096;
  for (std::size_t subjects = 2; subjects <= kMaxSubjects; ++subjects) {
    CohortSynthSpec cohort{subjects, spec.recording_s, spec.base, spec.seed};
    std::vector<Segment> segments;
    for (const auto& raw : synthesize_subjects(cohort)) {
      const auto sig = raw.rate_hz == kSegmentRateHz ? raw : downsample(raw, kSegmentRateHz);
      auto w = window(sig, spec.overlap);
      for (auto& s : w) segments.push_back(std::move(s));
    }
    if (segments.empty()) throw ConfigError("recording shorter than one segment");
    // Cheap lower bound before splitting.
    if (segments.size() < spec.train_segments + spec.val_segments) continue;
    auto split = split_by_subject(std::move(segments), spec.train_fraction, spec.seed);
    if (split.train.size() < spec.train_segments || split.val.size() < spec.val_segments) continue;
    split.train = thin(std::move(split.train), spec.train_segments);
    split.val = thin(std::move(split.val), spec.val_segments);
    return split;
  }
  throw ConfigError("cannot reach the requested segment counts");
}

}  // namespace edakd::signal
