#include <algorithm>
#include <cstdio>
#include <sstream>

#include "mlcslm/error.hpp"
#include "mlcslm/report.hpp"

namespace mlcslm {

namespace {

std::string percent(const std::optional<double>& rate) {
  if (!rate) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", *rate * 100.0);
  return buf;
}

std::string pad_right(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() < w ? std::string(w - s.size(), ' ') + s : s;
}

const char* state_name(SessionStatus::State s) {
  switch (s) {
    case SessionStatus::State::kScored: return "scored";
    case SessionStatus::State::kUnscored: return "unscored";
    case SessionStatus::State::kFailed: return "failed";
  }
  return "scored";
}

SessionStatus::State parse_state(const std::string& s) {
  if (s == "scored") return SessionStatus::State::kScored;
  if (s == "unscored") return SessionStatus::State::kUnscored;
  if (s == "failed") return SessionStatus::State::kFailed;
  throw FormatError("unknown session status '" + s + "'");
}

nlohmann::ordered_json row_to_json(const ReportRow& r) {
  nlohmann::ordered_json j;
  j["language"] = r.language;
  j["tcpwer"] = r.tcpwer ? nlohmann::ordered_json(*r.tcpwer) : nlohmann::ordered_json(nullptr);
  j["substitutions"] = r.substitutions;
  j["deletions"] = r.deletions;
  j["insertions"] = r.insertions;
  j["ref_words"] = r.ref_words;
  j["sessions"] = r.sessions;
  return j;
}

ReportRow row_from_json(const nlohmann::json& j) {
  ReportRow r;
  r.language = j.at("language").get<std::string>();
  if (!j.at("tcpwer").is_null()) r.tcpwer = j.at("tcpwer").get<double>();
  r.substitutions = j.at("substitutions").get<std::size_t>();
  r.deletions = j.at("deletions").get<std::size_t>();
  r.insertions = j.at("insertions").get<std::size_t>();
  r.ref_words = j.at("ref_words").get<std::size_t>();
  r.sessions = j.value("sessions", std::size_t{0});
  return r;
}

}  // namespace

std::size_t ScoreReport::failed_count() const {
  return static_cast<std::size_t>(std::count_if(sessions.begin(), sessions.end(), [](const auto& s) {
    return s.state == SessionStatus::State::kFailed;
  }));
}

bool table_order_less(const std::string& a, const std::string& b) {
  const bool ea = a.starts_with("English"), eb = b.starts_with("English");
  if (ea != eb) return ea;
  return a < b;
}

std::string render_report(const ScoreReport& report) {
  std::vector<const ReportRow*> rows;
  for (const auto& r : report.rows) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow* a, const ReportRow* b) {
    return table_order_less(a->language, b->language);
  });

  std::size_t name_w = std::string("Language").size();
  for (const auto* r : rows) name_w = std::max(name_w, r->language.size());
  name_w += 2;

  std::ostringstream os;
  auto line = [&](const std::string& name, const std::string& rate, const std::string& s,
                  const std::string& d, const std::string& i, const std::string& w) {
    std::string l = pad_right(name, name_w) + pad_left(rate, 10);
    if (!s.empty())
      l += pad_left(s, 8) + pad_left(d, 8) + pad_left(i, 8) + pad_left(w, 10);
    os << l << '\n';
  };
  line("Language", "tcpWER(%)", "Sub", "Del", "Ins", "RefWords");
  os << std::string(name_w + 10 + 34, '-') << '\n';
  for (const auto* r : rows)
    line(r->language, percent(r->tcpwer), std::to_string(r->substitutions),
         std::to_string(r->deletions), std::to_string(r->insertions),
         std::to_string(r->ref_words));
  os << std::string(name_w + 10 + 34, '-') << '\n';
  const ReportRow& o = report.overall;
  if (rows.empty() && o.ref_words == 0 && !o.tcpwer) {
    line("Overall", "-", "", "", "", "");
  } else {
    line("Overall", percent(o.tcpwer), std::to_string(o.substitutions),
         std::to_string(o.deletions), std::to_string(o.insertions),
         std::to_string(o.ref_words));
  }
  const std::size_t failed = report.failed_count();
  if (failed > 0) {
    os << '\n' << failed << " session(s) failed:\n";
    for (const auto& s : report.sessions)
      if (s.state == SessionStatus::State::kFailed)
        os << "  " << s.session_id << ": " << s.error << '\n';
  }
  return os.str();
}

nlohmann::ordered_json report_to_json(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["metric"] = "tcpWER";
  j["collar"] = report.collar;
  j["average"] = report.mode == AverageMode::kMicro ? "micro" : "macro";
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) j["rows"].push_back(row_to_json(r));
  j["overall"] = row_to_json(report.overall);
  j["sessions"] = nlohmann::ordered_json::array();
  for (const auto& s : report.sessions) {
    nlohmann::ordered_json e;
    e["session_id"] = s.session_id;
    e["language"] = s.language;
    e["status"] = state_name(s.state);
    e["tcpwer"] = s.tcpwer ? nlohmann::ordered_json(*s.tcpwer) : nlohmann::ordered_json(nullptr);
    if (!s.error.empty()) e["error"] = s.error;
    j["sessions"].push_back(std::move(e));
  }
  return j;
}

ScoreReport report_from_json(const nlohmann::json& j) {
  try {
    ScoreReport r;
    r.collar = j.value("collar", 0.0);
    const std::string avg = j.value("average", std::string("micro"));
    if (avg != "micro" && avg != "macro") throw FormatError("unknown average '" + avg + "'");
    r.mode = avg == "micro" ? AverageMode::kMicro : AverageMode::kMacro;
    for (const auto& row : j.at("rows")) r.rows.push_back(row_from_json(row));
    r.overall = row_from_json(j.at("overall"));
    if (j.contains("sessions"))
      for (const auto& e : j.at("sessions")) {
        SessionStatus s;
        s.session_id = e.at("session_id").get<std::string>();
        s.language = e.at("language").get<std::string>();
        s.state = parse_state(e.at("status").get<std::string>());
        if (!e.at("tcpwer").is_null()) s.tcpwer = e.at("tcpwer").get<double>();
        s.error = e.value("error", std::string());
        r.sessions.push_back(std::move(s));
      }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace mlcslm
