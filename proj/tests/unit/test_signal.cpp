#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "../support/tempdir.hpp"
#include "edakd/errors.hpp"
#include "edakd/signal/io.hpp"
#include "edakd/signal/kv_config.hpp"
#include "edakd/signal/segment.hpp"
#include "edakd/signal/synth.hpp"

namespace {

using namespace edakd;
using namespace edakd::signal;

SampledSignal sine(double freq, double rate, double seconds, double amp = 1.0, double offset = 0.0) {
  SampledSignal s;
  s.rate_hz = rate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  for (std::size_t i = 0; i < n; ++i) {
    s.samples.push_back(offset + amp * std::sin(2 * std::numbers::pi * freq * i / rate));
  }
  return s;
}

double rms(std::span<const double> x, std::size_t skip) {
  double acc = 0;
  for (std::size_t i = skip; i + skip < x.size(); ++i) acc += x[i] * x[i];
  return std::sqrt(acc / (x.size() - 2 * skip));
}

TEST(Downsample, ConstantStaysConstant) {
  SampledSignal s;
  s.rate_hz = 100;
  s.samples.assign(10000, 4.25);
  const auto out = downsample(s, 4.0);
  EXPECT_EQ(out.rate_hz, 4.0);
  EXPECT_EQ(out.samples.size(), 400u);
  for (double v : out.samples) EXPECT_NEAR(v, 4.25, 1e-9);
}

TEST(Downsample, SlowSinePreserved) {
  const auto out = downsample(sine(0.1, 100, 200), 4.0);
  // Compare against the analytic sine at the decimated instants, away from edges.
  double worst = 0;
  for (std::size_t i = 20; i + 20 < out.samples.size(); ++i) {
    const double truth = std::sin(2 * std::numbers::pi * 0.1 * i / 4.0);
    worst = std::max(worst, std::abs(out.samples[i] - truth));
  }
  EXPECT_LT(worst, 0.02);
}

TEST(Downsample, AboveNyquistAttenuated) {
  const auto in = sine(3.0, 100, 100);
  const auto out = downsample(in, 4.0);
  EXPECT_LT(rms(out.samples, 10), 0.1 * rms(in.samples, 0));
}

TEST(Downsample, RejectsUpsampling) {
  EXPECT_THROW(downsample(sine(0.1, 4, 10), 8.0), ConfigError);
  EXPECT_THROW(downsample(sine(0.1, 4, 10), 4.0), ConfigError);
}

TEST(Window, PaperSegmentCounts) {
  EXPECT_EQ(window_starts(1200, 512, 0.75).size(), 6u);
  EXPECT_EQ(window_starts(2400, 512, 0.75).size(), 15u);
  for (double ov : {0.0, 0.5, 0.75, 0.9}) EXPECT_EQ(window_starts(512, 512, ov).size(), 1u);
  EXPECT_TRUE(window_starts(511, 512, 0.75).empty());
}

TEST(Window, CountMatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> len(400, 5000);
  std::uniform_real_distribution<double> ov(0.0, 0.95);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = len(rng);
    const double o = ov(rng);
    const auto stride = static_cast<std::size_t>(std::llround(512 * (1 - o)));
    std::vector<std::size_t> brute;
    for (std::size_t s = 0; s + 512 <= n; s += stride) brute.push_back(s);
    EXPECT_EQ(window_starts(n, 512, o), brute) << n << " " << o;
    const auto ends = window_starts(n, 512, o, WindowAnchor::end);
    ASSERT_EQ(ends.size(), brute.size());
    if (!ends.empty()) EXPECT_EQ(ends.back() + 512, n);
  }
}

TEST(Window, SegmentsCarryProvenance) {
  auto s = sine(0.05, 4, 600, 1.0, 5.0);
  s.subject_id = "S7";
  s.site = Site::foot;
  const auto segs = window(s, 0.75);
  ASSERT_EQ(segs.size(), 15u);
  EXPECT_EQ(segs[1].start_time_s, 32.0);
  EXPECT_EQ(segs[1].subject_id, "S7");
  EXPECT_EQ(segs[1].site, Site::foot);
  EXPECT_EQ(segs[1].samples[0], s.samples[128]);
  EXPECT_THROW(window(s, 1.0), ConfigError);
}

TEST(Normalize, RoundTrip) {
  std::vector<double> x(512);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i + 1);
  const auto n = normalize(x);
  const auto back = denormalize(n.values, n.stats);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-10);
}

TEST(Normalize, ConstantSegment) {
  std::vector<double> x(512, 3.3);
  const auto n = normalize(x);
  EXPECT_EQ(n.stats.mu, 3.3);
  EXPECT_EQ(n.stats.sigma, kSigmaFloor);
  for (double v : n.values) EXPECT_EQ(v, 0.0);
}

TEST(Normalize, MomentsOfRandomSegments) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(5.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(512);
    for (double& v : x) v = nd(rng);
    const auto n = normalize(x);
    double m = 0, v = 0;
    for (double a : n.values) m += a;
    m /= 512;
    for (double a : n.values) v += (a - m) * (a - m);
    EXPECT_LT(std::abs(m), 1e-12);
    EXPECT_LT(std::abs(std::sqrt(v / 512) - 1), 1e-9);
    const auto back = denormalize(n.values, n.stats);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-10);
  }
}

TEST(Synth, NoScrsEqualsSmoothTonic) {
  SynthConfig cfg;
  cfg.scr_rate_per_min = 0;
  cfg.seed = 3;
  const auto c = synthesize_eda_components(cfg);
  ASSERT_EQ(c.signal.samples.size(), c.tonic.size());
  double max_d2 = 0;
  for (std::size_t i = 0; i < c.tonic.size(); ++i) {
    EXPECT_EQ(c.signal.samples[i], c.tonic[i]);
    if (i >= 2) max_d2 = std::max(max_d2, std::abs(c.tonic[i] - 2 * c.tonic[i - 1] + c.tonic[i - 2]));
  }
  // Knot spacing of 40 s at 4 Hz with a 6 uS range bounds the curvature well below this.
  EXPECT_LT(max_d2, 0.01);
  EXPECT_TRUE(c.onsets_s.empty());
}

TEST(Synth, TonicStaysInRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    const auto c = synthesize_eda_components(cfg);
    for (double v : c.tonic) {
      EXPECT_GE(v, cfg.tonic_low - 1e-12);
      EXPECT_LE(v, cfg.tonic_high + 1e-12);
    }
  }
}

TEST(Synth, KernelPeakMatchesClosedForm) {
  for (const auto& [rise, decay] : {std::pair{0.75, 10.0}, std::pair{0.5, 4.0}, std::pair{1.5, 20.0}}) {
    const double rate = 1000.0;
    const auto k = scr_kernel(rise, decay, rate);
    const auto it = std::max_element(k.begin(), k.end());
    const double t_sampled = static_cast<double>(it - k.begin()) / rate;
    const double t_closed = std::log(decay / rise) * decay * rise / (decay - rise);
    EXPECT_NEAR(scr_kernel_peak_time(rise, decay), t_closed, 1e-12);
    EXPECT_NEAR(t_sampled, t_closed, 1.0 / rate);
    EXPECT_DOUBLE_EQ(*it, 1.0);
    EXPECT_LT(k.back(), 1e-4 * 1.01);
  }
}

TEST(Synth, PoissonCountMatchesRate) {
  double total = 0;
  SynthConfig cfg;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.seed = seed;
    total += static_cast<double>(synthesize_eda_components(cfg).onsets_s.size());
  }
  const double expected = cfg.scr_rate_per_min * cfg.duration_s / 60.0;
  EXPECT_NEAR(total / 100, expected, 0.1 * expected);
}

TEST(Synth, PositiveAndFiniteSweep) {
  SynthConfig cfg;
  cfg.duration_s = 128;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    cfg.seed = seed;
    const auto s = synthesize_eda(cfg);
    for (double v : s.samples) {
      ASSERT_TRUE(std::isfinite(v)) << seed;
      ASSERT_GT(v, 0.0) << seed;
    }
  }
}

TEST(Synth, Deterministic) {
  SynthConfig cfg;
  cfg.seed = 77;
  EXPECT_EQ(synthesize_eda(cfg).samples, synthesize_eda(cfg).samples);
}

TEST(Synth, ConfigValidation) {
  SynthConfig cfg;
  cfg.tonic_low = 5;
  cfg.tonic_high = 5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.rise_tau_s = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.scr_rate_per_min = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

std::vector<Segment> cohort_segments(std::size_t subjects, std::size_t per_subject) {
  std::vector<Segment> out;
  for (std::size_t s = 0; s < subjects; ++s) {
    for (std::size_t k = 0; k < per_subject; ++k) {
      Segment seg;
      seg.samples.assign(512, 1.0 + s);
      seg.subject_id = "S" + std::to_string(s);
      out.push_back(seg);
    }
  }
  return out;
}

TEST(Split, EightyTwenty) {
  const auto split = split_by_subject(cohort_segments(10, 3), 0.8, 1);
  std::set<std::string> tr, va;
  for (const auto& s : split.train) tr.insert(s.subject_id);
  for (const auto& s : split.val) va.insert(s.subject_id);
  EXPECT_EQ(tr.size(), 8u);
  EXPECT_EQ(va.size(), 2u);
  EXPECT_EQ(split.train.size(), 24u);
  for (const auto& id : tr) EXPECT_EQ(va.count(id), 0u);
}

TEST(Split, TwoSubjectsAndErrors) {
  const auto split = split_by_subject(cohort_segments(2, 2), 0.8, 1);
  EXPECT_EQ(split.train.size(), 2u);
  EXPECT_EQ(split.val.size(), 2u);
  EXPECT_THROW(split_by_subject(cohort_segments(1, 4), 0.8, 1), ConfigError);
}

TEST(Split, DeterministicAndDisjointForEverySeed) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t n = 2 + rng() % 30;
    const auto a = split_by_subject(cohort_segments(n, 1 + rng() % 3), 0.8, seed);
    std::set<std::string> tr;
    for (const auto& s : a.train) tr.insert(s.subject_id);
    for (const auto& s : a.val) ASSERT_EQ(tr.count(s.subject_id), 0u);
    ASSERT_FALSE(a.val.empty());
    ASSERT_FALSE(a.train.empty());
  }
  const auto x = split_by_subject(cohort_segments(10, 1), 0.8, 42);
  const auto y = split_by_subject(cohort_segments(10, 1), 0.8, 42);
  ASSERT_EQ(x.val.size(), y.val.size());
  for (std::size_t i = 0; i < x.val.size(); ++i) EXPECT_EQ(x.val[i].subject_id, y.val[i].subject_id);
}

TEST(Split, TiesGoToTrain) {
  // 5 subjects at 0.5 -> 2.5 rounds up toward train.
  const auto split = split_by_subject(cohort_segments(5, 1), 0.5, 3);
  EXPECT_EQ(split.train.size(), 3u);
}

TEST(Io, SegmentJsonlRoundTripIsBitExact) {
  edakd::testing::TempDir dir;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> nd(3, 1);
  std::vector<Segment> segs(3);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    segs[i].samples.resize(512);
    for (double& v : segs[i].samples) v = nd(rng);
    segs[i].subject_id = "P" + std::to_string(i);
    segs[i].start_time_s = 32.0 * i;
    segs[i].site = Site::hand;
    segs[i].kind = SegmentKind::real_noisy;
  }
  write_segments_jsonl(dir / "s.jsonl", segs);
  const auto back = read_segments_jsonl(dir / "s.jsonl");
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].samples, segs[i].samples);
    EXPECT_EQ(back[i].subject_id, segs[i].subject_id);
    EXPECT_EQ(back[i].start_time_s, segs[i].start_time_s);
    EXPECT_EQ(back[i].site, Site::hand);
    EXPECT_EQ(back[i].kind, SegmentKind::real_noisy);
  }
  std::ifstream in(dir / "s.jsonl");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first.rfind("{\"subject_id\":\"P0\",\"site\":\"hand\",\"rate_hz\":4", 0), 0u) << first;
}

TEST(Io, MalformedSegmentsReportLine) {
  edakd::testing::TempDir dir;
  write_text(dir / "bad.jsonl",
             "{\"subject_id\":\"a\",\"site\":\"finger\",\"rate_hz\":4,\"start_time_s\":0,\"kind\":"
             "\"clean_target\",\"samples\":[1,2]}\n");
  try {
    read_segments_jsonl(dir / "bad.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":1:"), std::string::npos) << e.what();
  }
  write_text(dir / "bad2.jsonl", "not json\n");
  EXPECT_THROW(read_segments_jsonl(dir / "bad2.jsonl"), FormatError);
}

TEST(Io, ShortestRoundTripFormatting) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Io, CsvRoundTrip) {
  edakd::testing::TempDir dir;
  auto s = sine(0.02, 4, 300, 0.5, 3.0);
  s.subject_id = "X";
  write_signal_csv(dir / "x.csv", s);
  const auto back = read_signal_csv(dir / "x.csv", "X");
  EXPECT_EQ(back.rate_hz, 4.0);
  EXPECT_EQ(back.samples, s.samples);
}

TEST(KvConfig, ParseAndTypes) {
  const auto cfg = KeyValueConfig::parse("# c\nsynth.duration_s = 300\n\nflag=true\nname = abc # tail\n");
  EXPECT_EQ(cfg.get_double("synth.duration_s", 0), 300.0);
  EXPECT_TRUE(cfg.get_bool("flag", false));
  EXPECT_EQ(cfg.get_int("missing", 7), 7);
  const auto sc = SynthConfig::from_config(cfg);
  EXPECT_EQ(sc.duration_s, 300.0);
  EXPECT_THROW(KeyValueConfig::parse("novalue\n"), FormatError);
  EXPECT_THROW(cfg.get_double("flag", 0), ConfigError);
}

}  // namespace
