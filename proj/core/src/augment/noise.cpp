#include "edakd/augment/noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>

#include "edakd/errors.hpp"
#include "edakd/signal/io.hpp"
#include "edakd/signal/segment.hpp"

namespace edakd::augment {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double energy(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

std::vector<double> centered(std::vector<double> x) {
  const double mu = signal::mean(x);
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  // Already centered up to rounding: leave the bits alone so save/load is exact.
  if (std::abs(mu) <= 1e-12 * peak) return x;
  for (double& v : x) v -= mu;
  return x;
}

}  // namespace

MaBank::MaBank(std::vector<std::vector<double>> entries) {
  entries_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& e = entries[i];
    if (e.size() != signal::kSegmentLength) {
      throw ConfigError("MA bank entry " + std::to_string(i) + " has length " +
                        std::to_string(e.size()) + ", expected 512");
    }
    for (double v : e) {
      if (!std::isfinite(v)) throw ConfigError("MA bank entry " + std::to_string(i) + " is not finite");
    }
    auto c = centered(std::move(e));
    if (signal::stddev(c) <= signal::kSigmaFloor) {
      throw ConfigError("MA bank entry " + std::to_string(i) + " has no variance");
    }
    entries_.push_back(std::move(c));
  }
}

MaBank MaBank::synthesize(std::size_t count, std::uint64_t seed) {
  constexpr double kRate = signal::kSegmentRateHz;
  const std::size_t n = signal::kSegmentLength;
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t e = 0; e < count; ++e) {
    Rng rng(derive_seed(seed, {e}));
    std::uniform_int_distribution<int> bursts_dist(2, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(n, 0.0);
    const int bursts = bursts_dist(rng);
    for (int b = 0; b < bursts; ++b) {
      const double center = u(rng) * static_cast<double>(n) / kRate;  // s
      const double width = 2.0 + 10.0 * u(rng);                       // s
      const double freq = 0.05 + 0.45 * u(rng);                       // Hz
      const double phase = 2.0 * std::numbers::pi * u(rng);
      const double amp = std::exp(0.5 * gauss(rng));
      // Sharp level jump under the burst envelope, typical of electrode slip.
      const double jump = 0.5 * gauss(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / kRate;
        const double d = (t - center) / width;
        const double env = std::exp(-0.5 * d * d);
        x[i] += amp * env * std::sin(2.0 * std::numbers::pi * freq * t + phase);
        x[i] += jump * env;
      }
    }
    out.push_back(std::move(x));
  }
  return MaBank(std::move(out));
}

MaBank MaBank::load_jsonl(const std::filesystem::path& path) {
  const auto records = signal::read_jsonl(path);
  std::vector<std::vector<double>> entries;
  entries.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    try {
      if (r.is_array()) {
        entries.push_back(r.get<std::vector<double>>());
      } else {
        entries.push_back(r.at("samples").get<std::vector<double>>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  try {
    return MaBank(std::move(entries));
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void MaBank::save_jsonl(const std::filesystem::path& path) const {
  std::vector<signal::OrderedJson> records;
  records.reserve(entries_.size());
  for (const auto& e : entries_) {
    signal::OrderedJson j;
    j["samples"] = e;
    records.push_back(std::move(j));
  }
  signal::write_jsonl(path, records);
}

std::vector<double> inject_real_ma(std::span<const double> clean, const MaBank& bank, double scale,
                                   std::size_t shift, std::size_t pick) {
  if (bank.empty()) throw ConfigError("real motion-artifact injection needs a non-empty MA bank");
  if (pick >= bank.size()) throw ConfigError("MA bank index out of range");
  const auto& ma = bank[pick];
  if (ma.size() != clean.size()) throw ShapeError("MA entry length differs from segment length");
  const std::size_t n = clean.size();
  const double gain = scale * std::max(signal::stddev(clean), signal::kSigmaFloor) / signal::stddev(ma);
  std::vector<double> out(clean.begin(), clean.end());
  for (std::size_t i = 0; i < n; ++i) out[i] += gain * ma[(i + shift) % n];
  return out;
}

std::vector<double> colored_noise(std::size_t length, double beta, Rng& rng, double rate_hz) {
  if (length < 2) throw ConfigError("colored noise needs at least 2 samples");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t bins = length / 2 + 1;
  double* time = fftw_alloc_real(length);
  fftw_complex* freq = fftw_alloc_complex(bins);
  fftw_plan forward, backward;
  {
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(length), time, freq, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(length), freq, time, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < length; ++i) time[i] = gauss(rng);
  fftw_execute(forward);
  freq[0][0] = 0.0;
  freq[0][1] = 0.0;
  for (std::size_t k = 1; k < bins; ++k) {
    const double f = static_cast<double>(k) * rate_hz / static_cast<double>(length);
    const double g = std::pow(f, -beta / 2.0);
    freq[k][0] *= g;
    freq[k][1] *= g;
  }
  fftw_execute(backward);
  std::vector<double> out(time, time + length);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(time);
  fftw_free(freq);

  const double mu = signal::mean(out);
  for (double& v : out) v -= mu;
  const double sd = signal::stddev(out);
  if (sd > 0.0) {
    for (double& v : out) v /= sd;
  }
  return out;
}

double snr_scale(std::span<const double> clean, std::span<const double> noise, double snr_db) {
  if (clean.size() != noise.size()) throw ShapeError("noise length differs from signal length");
  const double en = energy(noise);
  if (!(en > 0.0)) throw ConfigError("cannot scale all-zero noise to a target SNR");
  return std::sqrt(energy(clean) / (en * std::pow(10.0, snr_db / 10.0)));
}

std::vector<double> add_at_snr(std::span<const double> clean, std::span<const double> noise,
                               double snr_db) {
  const double k = snr_scale(clean, noise, snr_db);
  std::vector<double> out(clean.begin(), clean.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += k * noise[i];
  return out;
}

}  // namespace edakd::augment
