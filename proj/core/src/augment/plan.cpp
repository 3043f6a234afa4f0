#include "edakd/augment/plan.hpp"

#include <string>

#include "edakd/augment/distortion.hpp"
#include "edakd/errors.hpp"
#include "edakd/signal/segment.hpp"

namespace edakd::augment {

std::string_view to_string(NoiseKind kind) {
  return kind == NoiseKind::real_ma ? "real_ma" : "colored";
}

std::string_view to_string(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::clipping: return "clipping";
    case DistortionKind::impulse: return "impulse";
    case DistortionKind::shearing: return "shearing";
  }
  return "?";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "real_ma") return NoiseKind::real_ma;
  if (text == "colored") return NoiseKind::colored;
  throw FormatError("unknown noise kind '" + std::string(text) + "'");
}

DistortionKind parse_distortion_kind(std::string_view text) {
  if (text == "clipping") return DistortionKind::clipping;
  if (text == "impulse") return DistortionKind::impulse;
  if (text == "shearing") return DistortionKind::shearing;
  throw FormatError("unknown distortion kind '" + std::string(text) + "'");
}

namespace {

template <typename T>
void check_range(const char* name, T lo, T hi, T ref_lo, T ref_hi, bool allow_out_of_range) {
  if (!(lo <= hi)) throw ConfigError(std::string("augment.") + name + ": min exceeds max");
  if (!allow_out_of_range && (lo < ref_lo || hi > ref_hi)) {
    throw ConfigError(std::string("augment.") + name + " range [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "] leaves the default bounds [" +
                      std::to_string(ref_lo) + ", " + std::to_string(ref_hi) +
                      "]; pass --allow-out-of-range to permit it");
  }
}

}  // namespace

void AugmentRanges::validate(bool allow) const {
  const AugmentRanges d;
  check_range("ma_scale", ma_scale_min, ma_scale_max, d.ma_scale_min, d.ma_scale_max, allow);
  check_range("snr_db", snr_db_min, snr_db_max, d.snr_db_min, d.snr_db_max, allow);
  check_range("beta", beta_min, beta_max, d.beta_min, d.beta_max, allow);
  check_range("clip", clip_min, clip_max, d.clip_min, d.clip_max, allow);
  check_range("impulse_amp", impulse_amp_min, impulse_amp_max, d.impulse_amp_min,
              d.impulse_amp_max, allow);
  check_range("impulse_count", impulse_count_min, impulse_count_max, d.impulse_count_min,
              d.impulse_count_max, allow);
  check_range("impulse_width", impulse_width_min, impulse_width_max, d.impulse_width_min,
              d.impulse_width_max, allow);
  check_range("shear_count", shear_count_min, shear_count_max, d.shear_count_min,
              d.shear_count_max, allow);
  // Hard physical limits that no flag overrides.
  if (ma_scale_min < 0.0 || clip_min < 0.0 || clip_max >= 1.0 || impulse_amp_min < 0.0 ||
      impulse_count_min < 0 || impulse_width_min < 1 || shear_count_min < 0 ||
      impulse_count_max > 16 || impulse_width_max > 64 || shear_count_max > 64) {
    throw ConfigError("augmentation range outside physically meaningful limits");
  }
}

std::vector<std::string> AugmentRanges::config_keys() {
  return {"augment.ma_scale_min",      "augment.ma_scale_max",      "augment.snr_db_min",
          "augment.snr_db_max",        "augment.beta_min",          "augment.beta_max",
          "augment.clip_min",          "augment.clip_max",          "augment.impulse_amp_min",
          "augment.impulse_amp_max",   "augment.impulse_count_min", "augment.impulse_count_max",
          "augment.impulse_width_min", "augment.impulse_width_max", "augment.shear_count_min",
          "augment.shear_count_max"};
}

AugmentRanges AugmentRanges::from_config(const signal::KeyValueConfig& kv, bool allow) {
  AugmentRanges r;
  auto d = [&](const char* key, double& v) { v = kv.get_double(std::string("augment.") + key, v); };
  auto i = [&](const char* key, int& v) {
    v = static_cast<int>(kv.get_int(std::string("augment.") + key, v));
  };
  d("ma_scale_min", r.ma_scale_min);
  d("ma_scale_max", r.ma_scale_max);
  d("snr_db_min", r.snr_db_min);
  d("snr_db_max", r.snr_db_max);
  d("beta_min", r.beta_min);
  d("beta_max", r.beta_max);
  d("clip_min", r.clip_min);
  d("clip_max", r.clip_max);
  d("impulse_amp_min", r.impulse_amp_min);
  d("impulse_amp_max", r.impulse_amp_max);
  i("impulse_count_min", r.impulse_count_min);
  i("impulse_count_max", r.impulse_count_max);
  i("impulse_width_min", r.impulse_width_min);
  i("impulse_width_max", r.impulse_width_max);
  i("shear_count_min", r.shear_count_min);
  i("shear_count_max", r.shear_count_max);
  r.validate(allow);
  return r;
}

bool AugmentationPlan::within(const AugmentRanges& r) const {
  auto in = [](auto v, auto lo, auto hi) { return v >= lo && v <= hi; };
  return in(ma_scale, r.ma_scale_min, r.ma_scale_max) && ma_shift < signal::kSegmentLength &&
         in(snr_db, r.snr_db_min, r.snr_db_max) && in(beta, r.beta_min, r.beta_max) &&
         in(clip_p, r.clip_min, r.clip_max) &&
         in(impulse_amp, r.impulse_amp_min, r.impulse_amp_max) &&
         in(impulse_count, r.impulse_count_min, r.impulse_count_max) &&
         in(impulse_width, r.impulse_width_min, r.impulse_width_max) &&
         in(shear_count, r.shear_count_min, r.shear_count_max);
}

AugmentationPlan sample_plan(const AugmentRanges& r, std::size_t bank_size, std::uint64_t seed) {
  Rng rng(seed);
  auto real = [&](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  AugmentationPlan p;
  p.noise = (bank_size > 0 && std::bernoulli_distribution(0.5)(rng)) ? NoiseKind::real_ma
                                                                      : NoiseKind::colored;
  p.ma_scale = real(r.ma_scale_min, r.ma_scale_max);
  p.ma_shift = std::uniform_int_distribution<std::size_t>(0, signal::kSegmentLength - 1)(rng);
  p.ma_pick = bank_size > 0 ? std::uniform_int_distribution<std::size_t>(0, bank_size - 1)(rng) : 0;
  p.snr_db = real(r.snr_db_min, r.snr_db_max);
  p.beta = real(r.beta_min, r.beta_max);

  p.distortion = static_cast<DistortionKind>(integer(0, 2));
  p.clip_p = real(r.clip_min, r.clip_max);
  p.impulse_amp = real(r.impulse_amp_min, r.impulse_amp_max);
  p.impulse_count = integer(r.impulse_count_min, r.impulse_count_max);
  p.impulse_width = integer(r.impulse_width_min, r.impulse_width_max);
  p.shear_count = integer(r.shear_count_min, r.shear_count_max);
  p.seed = rng();
  return p;
}

nlohmann::ordered_json plan_to_json(const AugmentationPlan& p) {
  nlohmann::ordered_json j;
  j["noise"] = std::string(to_string(p.noise));
  if (p.noise == NoiseKind::real_ma) {
    j["ma_scale"] = p.ma_scale;
    j["ma_shift"] = p.ma_shift;
    j["ma_pick"] = p.ma_pick;
  } else {
    j["snr_db"] = p.snr_db;
    j["beta"] = p.beta;
  }
  j["distortion"] = std::string(to_string(p.distortion));
  switch (p.distortion) {
    case DistortionKind::clipping: j["clip_p"] = p.clip_p; break;
    case DistortionKind::impulse:
      j["impulse_amp"] = p.impulse_amp;
      j["impulse_count"] = p.impulse_count;
      j["impulse_width"] = p.impulse_width;
      break;
    case DistortionKind::shearing: j["shear_count"] = p.shear_count; break;
  }
  j["seed"] = p.seed;
  return j;
}

AugmentationPlan plan_from_json(const nlohmann::json& j) {
  try {
    AugmentationPlan p;
    p.noise = parse_noise_kind(j.at("noise").get<std::string>());
    p.ma_scale = j.value("ma_scale", p.ma_scale);
    p.ma_shift = j.value("ma_shift", p.ma_shift);
    p.ma_pick = j.value("ma_pick", p.ma_pick);
    p.snr_db = j.value("snr_db", p.snr_db);
    p.beta = j.value("beta", p.beta);
    p.distortion = parse_distortion_kind(j.at("distortion").get<std::string>());
    p.clip_p = j.value("clip_p", p.clip_p);
    p.impulse_amp = j.value("impulse_amp", p.impulse_amp);
    p.impulse_count = j.value("impulse_count", p.impulse_count);
    p.impulse_width = j.value("impulse_width", p.impulse_width);
    p.shear_count = j.value("shear_count", p.shear_count);
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed augmentation plan: ") + e.what());
  }
}

CorruptedPair corrupt(std::span<const double> clean, const AugmentationPlan& plan,
                      const MaBank& bank) {
  Rng rng(derive_seed(plan.seed, {1}));
  std::vector<double> noisy;
  if (plan.noise == NoiseKind::real_ma) {
    noisy = inject_real_ma(clean, bank, plan.ma_scale, plan.ma_shift, plan.ma_pick);
  } else {
    const auto noise = colored_noise(clean.size(), plan.beta, rng);
    noisy = add_at_snr(clean, noise, plan.snr_db);
  }
  CorruptedPair out;
  switch (plan.distortion) {
    case DistortionKind::clipping: out.input = clip_upper(noisy, plan.clip_p); break;
    case DistortionKind::impulse:
      out.input = add_impulses(noisy, plan.impulse_amp, static_cast<std::size_t>(plan.impulse_count),
                               static_cast<std::size_t>(plan.impulse_width), rng);
      break;
    case DistortionKind::shearing:
      out.input = shear(noisy, static_cast<std::size_t>(plan.shear_count), rng);
      break;
  }
  out.target.assign(clean.begin(), clean.end());
  return out;
}

}  // namespace edakd::augment
