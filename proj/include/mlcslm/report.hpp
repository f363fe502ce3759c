#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlcslm/types.hpp"

namespace mlcslm {

enum class AverageMode { kMicro, kMacro };

struct ReportRow {
  std::string language;  // "Overall" for the aggregate row
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_words = 0;
  std::size_t sessions = 0;
  // Not clamped: insertion-heavy output can exceed 1.0.
  std::optional<double> tcpwer;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct SessionStatus {
  std::string session_id;
  std::string language;
  enum class State { kScored, kUnscored, kFailed } state = State::kScored;
  std::string error;  // set when failed
  std::optional<double> tcpwer;

  friend bool operator==(const SessionStatus&, const SessionStatus&) = default;
};

// Per-language rows plus an overall row. In micro mode overall counts are
// the sums of the row counts.
struct ScoreReport {
  std::vector<ReportRow> rows;
  ReportRow overall{"Overall", 0, 0, 0, 0, 0, std::nullopt};
  AverageMode mode = AverageMode::kMicro;
  double collar = 0.0;
  std::vector<SessionStatus> sessions;

  std::size_t failed_count() const;
  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

// Rows sorted English variants first, then alphabetically; rates as percent
// with two decimals; final "Overall" row. Undefined rates print as "-".
std::string render_report(const ScoreReport& report);

// Language ordering used by render_report.
bool table_order_less(const std::string& a, const std::string& b);

nlohmann::ordered_json report_to_json(const ScoreReport& report);
ScoreReport report_from_json(const nlohmann::json& j);

}  // namespace mlcslm
