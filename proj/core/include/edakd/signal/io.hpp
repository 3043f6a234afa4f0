#pragma once

#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "edakd/signal/segment.hpp"

namespace edakd::signal {

using OrderedJson = nlohmann::ordered_json;

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

/// {subject_id, site, rate_hz, start_time_s, kind, samples}
OrderedJson segment_to_json(const Segment& segment);
/// Accepts extra keys; throws FormatError on missing/ill-typed fields.
Segment segment_from_json(const nlohmann::json& record);

void write_jsonl(const std::filesystem::path& path, std::span<const OrderedJson> records);
/// Each line parsed as JSON; errors carry "<path>:<line>".
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
/// Calls fn(record, line_number) per non-blank line. Exceptions of type
/// FormatError or ConfigError thrown by fn are rethrown as FormatError
/// prefixed with "<path>:<line>".
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const nlohmann::json&, std::size_t)>& fn);

void write_segments_jsonl(const std::filesystem::path& path, std::span<const Segment> segments);
std::vector<Segment> read_segments_jsonl(const std::filesystem::path& path);

/// Two-column CSV with header `time_s,value_us`.
void write_signal_csv(const std::filesystem::path& path, const SampledSignal& signal);
/// Rate is inferred from the median time step.
SampledSignal read_signal_csv(const std::filesystem::path& path, const std::string& subject_id);

/// Writes `text` to `path` atomically enough for our purposes (truncate + write).
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace edakd::signal
