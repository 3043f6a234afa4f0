#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace edakd::cli {

/// Pretty-printed, fixed key order, trailing newline. Creates parent dirs.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& json);

/// Progress line on stderr.
void note(const std::string& message);

/// Wall-clock record for one command, written to logs/<command>_timing.json
/// on destruction so that JSON outputs stay timestamp free.
class TimingSidecar {
 public:
  TimingSidecar(std::filesystem::path workdir, std::string command);
  ~TimingSidecar();
  TimingSidecar(const TimingSidecar&) = delete;
  TimingSidecar& operator=(const TimingSidecar&) = delete;

 private:
  std::filesystem::path workdir_;
  std::string command_;
  std::chrono::system_clock::time_point wall_start_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace edakd::cli
