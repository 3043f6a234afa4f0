#pragma once

#include <cstddef>
#include <cstdint>

#include "edakd/signal/segment.hpp"
#include "edakd/signal/synth.hpp"

namespace edakd::signal {

struct DatasetSpec {
  std::size_t train_segments = 200;
  std::size_t val_segments = 50;
  double train_fraction = 0.8;
  double overlap = 0.75;
  double recording_s = 600.0;
  SynthConfig base;
  std::uint64_t seed = 0;
};

/// Synthetic subjects, windowed and split subject-wise, then thinned to the
/// requested counts by even subsampling. Subjects are added until both sides
/// of the split are large enough.
SubjectSplit make_synthetic_dataset(const DatasetSpec& spec);

}  // namespace edakd::signal
