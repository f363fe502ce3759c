#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlcslm/report.hpp"
#include "mlcslm/tcp.hpp"
#include "mlcslm/triplets.hpp"

namespace mlcslm {

// Run configuration, usually loaded from run.json. Relative paths in the
// file resolve against the file's directory.
struct RunConfig {
  std::filesystem::path manifest;
  // When set, run per session with MLCSLM_SESSION_ID / MLCSLM_AUDIO in the
  // environment; prints RTTM on stdout. Otherwise each manifest entry's
  // "rttm" file is read.
  std::optional<std::string> diarizer_command;
  // Exactly one of these supplies embeddings. The embedder command gets the
  // session's post-processed RTTM on stdin and prints an EMB1 archive.
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::string> embedder_command;
  std::string backend_command;
  Seconds collar = kDefaultTcpCollar;
  AverageMode average = AverageMode::kMicro;
  TripletBuildConfig triplets;
  std::optional<std::filesystem::path> registry;
  std::filesystem::path output_dir;
  std::size_t workers = 1;
  std::chrono::milliseconds backend_timeout{300'000};
};

RunConfig load_run_config(const std::filesystem::path& path);

// Every violation found, empty when the config is usable.
std::vector<std::string> validate_config(const RunConfig& config);

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct RunOutcome {
  ScoreReport report;
  // 0 all sessions processed, 2 some sessions failed.
  int exit_code = 0;
};

// Diarization -> triplets -> backend -> hyp.seglst.json -> scoring. Writes
// rttm/, requests/, hyp.seglst.json, report.json and report.txt under
// output_dir. Per-session faults are recorded in the report; an invalid
// config throws ConfigError.
RunOutcome run(const RunConfig& config);

}  // namespace mlcslm
