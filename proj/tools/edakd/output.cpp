#include "output.hpp"

#include <ctime>
#include <iostream>

#include "edakd/signal/io.hpp"

namespace edakd::cli {

namespace {

std::string iso8601(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& json) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  signal::write_text(path, json.dump(2) + "\n");
}

void note(const std::string& message) { std::cerr << "edakd: " << message << '\n'; }

TimingSidecar::TimingSidecar(std::filesystem::path workdir, std::string command)
    : workdir_(std::move(workdir)),
      command_(std::move(command)),
      wall_start_(std::chrono::system_clock::now()),
      start_(std::chrono::steady_clock::now()) {}

TimingSidecar::~TimingSidecar() {
  try {
    nlohmann::ordered_json j;
    j["command"] = command_;
    j["started"] = iso8601(wall_start_);
    j["finished"] = iso8601(std::chrono::system_clock::now());
    j["elapsed_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_json(workdir_ / "logs" / (command_ + "_timing.json"), j);
  } catch (...) {
    // Timing is best effort.
  }
}

}  // namespace edakd::cli
