#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "edakd/rng.hpp"

namespace edakd::augment {

/// Pure motion-artifact segments (512 samples, zero-mean) used as additive noise.
class MaBank {
 public:
  MaBank() = default;
  /// Entries are centered on insertion; throws ConfigError on wrong length,
  /// non-finite values or zero variance.
  explicit MaBank(std::vector<std::vector<double>> entries);

  /// Band-limited bursts dominated by 0-0.5 Hz content.
  static MaBank synthesize(std::size_t count, std::uint64_t seed);
  /// One record per line: either a bare array or an object with "samples".
  static MaBank load_jsonl(const std::filesystem::path& path);
  void save_jsonl(const std::filesystem::path& path) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<double>& operator[](std::size_t i) const { return entries_.at(i); }

 private:
  std::vector<std::vector<double>> entries_;
};

/// clean + circshift(bank[pick], shift) * scale * std(clean) / std(bank[pick]).
/// The shifted entry is read as bank[pick][(n + shift) mod length].
std::vector<double> inject_real_ma(std::span<const double> clean, const MaBank& bank, double scale,
                                   std::size_t shift, std::size_t pick);

/// Zero-mean, unit-variance noise with PSD proportional to 1/f^beta, made by
/// scaling the spectrum of white Gaussian noise by f^(-beta/2). Frequencies are
/// taken at `rate_hz`; the DC bin is removed.
std::vector<double> colored_noise(std::size_t length, double beta, Rng& rng, double rate_hz = 4.0);

/// Scale factor k so that 10*log10(sum(clean^2) / sum((k*noise)^2)) == snr_db.
double snr_scale(std::span<const double> clean, std::span<const double> noise, double snr_db);
/// clean + snr_scale(...) * noise. Throws ConfigError for all-zero noise.
std::vector<double> add_at_snr(std::span<const double> clean, std::span<const double> noise,
                               double snr_db);

}  // namespace edakd::augment
