#include "edakd/signal/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "edakd/errors.hpp"

namespace edakd::signal {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw FormatError("cannot format number");
  return std::string(buf.data(), ptr);
}

OrderedJson segment_to_json(const Segment& s) {
  OrderedJson j;
  j["subject_id"] = s.subject_id;
  j["site"] = std::string(to_string(s.site));
  j["rate_hz"] = kSegmentRateHz;
  j["start_time_s"] = s.start_time_s;
  j["kind"] = std::string(to_string(s.kind));
  j["samples"] = s.samples;
  return j;
}

Segment segment_from_json(const nlohmann::json& j) {
  try {
    Segment s;
    s.subject_id = j.at("subject_id").get<std::string>();
    s.site = j.contains("site") ? parse_site(j.at("site").get<std::string>()) : Site::other;
    const double rate = j.contains("rate_hz") ? j.at("rate_hz").get<double>() : kSegmentRateHz;
    if (std::abs(rate - kSegmentRateHz) > 1e-9) {
      throw FormatError("segment rate_hz must be 4, got " + format_double(rate));
    }
    s.start_time_s = j.contains("start_time_s") ? j.at("start_time_s").get<double>() : 0.0;
    s.kind = j.contains("kind") ? parse_kind(j.at("kind").get<std::string>())
                                : SegmentKind::clean_target;
    if (j.contains("role")) s.role = parse_role(j.at("role").get<std::string>());
    s.samples = j.at("samples").get<std::vector<double>>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed segment record: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed: " + path.string());
}

void write_jsonl(const std::filesystem::path& path, std::span<const OrderedJson> records) {
  std::string text;
  for (const auto& r : records) {
    text += r.dump();
    text += '\n';
  }
  write_text(path, text);
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + e.what());
    }
    try {
      fn(record, lineno);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where + e.what());
    } catch (const ConfigError& e) {
      throw FormatError(where + e.what());
    }
  }
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(j); });
  return out;
}

void write_segments_jsonl(const std::filesystem::path& path, std::span<const Segment> segments) {
  std::vector<OrderedJson> records;
  records.reserve(segments.size());
  for (const auto& s : segments) records.push_back(segment_to_json(s));
  write_jsonl(path, records);
}

std::vector<Segment> read_segments_jsonl(const std::filesystem::path& path) {
  std::vector<Segment> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(segment_from_json(j)); });
  return out;
}

void write_signal_csv(const std::filesystem::path& path, const SampledSignal& signal) {
  std::string text = "time_s,value_us\n";
  for (std::size_t i = 0; i < signal.samples.size(); ++i) {
    text += format_double(static_cast<double>(i) / signal.rate_hz);
    text += ',';
    text += format_double(signal.samples[i]);
    text += '\n';
  }
  write_text(path, text);
}

SampledSignal read_signal_csv(const std::filesystem::path& path, const std::string& subject_id) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<double> times, values;
  std::string line;
  std::size_t lineno = 0;
  auto parse = [&](std::string_view field, double& out) {
    while (!field.empty() && (field.front() == ' ')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    double t = 0.0, v = 0.0;
    if (comma == std::string::npos ||
        !parse(std::string_view(line).substr(0, comma), t) ||
        !parse(std::string_view(line).substr(comma + 1), v)) {
      if (lineno == 1) continue;  // header
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected time_s,value_us");
    }
    times.push_back(t);
    values.push_back(v);
  }
  if (times.size() < 2) throw FormatError(path.string() + ": need at least two samples");
  std::vector<double> steps;
  for (std::size_t i = 1; i < times.size(); ++i) steps.push_back(times[i] - times[i - 1]);
  std::nth_element(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2), steps.end());
  const double dt = steps[steps.size() / 2];
  if (!(dt > 0.0)) throw FormatError(path.string() + ": time column must increase");
  SampledSignal s;
  s.samples = std::move(values);
  s.rate_hz = 1.0 / dt;
  // Snap to a clean rate when the inferred value is within rounding of one.
  if (std::abs(s.rate_hz - std::round(s.rate_hz)) < 1e-6) s.rate_hz = std::round(s.rate_hz);
  s.subject_id = subject_id;
  s.validate();
  return s;
}

}  // namespace edakd::signal
