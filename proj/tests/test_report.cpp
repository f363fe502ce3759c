#include <random>
#include <sstream>

#include <doctest.h>

#include "mlcslm/error.hpp"
#include "mlcslm/report.hpp"
#include "report_table.hpp"

using namespace mlcslm;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  for (std::string f; is >> f;) out.push_back(f);
  return out;
}

ReportRow row(const std::string& lang, double rate) {
  return ReportRow{lang, 0, 0, 0, 100, 1, rate};
}

}  // namespace

TEST_CASE("render_report prints rates with two decimals") {
  ScoreReport r;
  r.rows = {row("French", 0.2991)};
  r.overall.tcpwer = 0.2356;
  const auto ls = lines(render_report(r));
  REQUIRE(ls.size() == 5);
  CHECK(fields(ls[0])[0] == "Language");
  CHECK(fields(ls[2])[0] == "French");
  CHECK(fields(ls[2])[1] == "29.91");
  CHECK(fields(ls[4])[0] == "Overall");
  CHECK(fields(ls[4])[1] == "23.56");
}

TEST_CASE("render_report orders rows English first, then alphabetically") {
  std::vector<ReportRow> rows;
  for (const auto& [lang, pct] : fixture::kDevColumn) rows.push_back(row(lang, std::stod(pct) / 100));
  std::mt19937 rng(151);
  std::shuffle(rows.begin(), rows.end(), rng);
  ScoreReport r;
  r.rows = rows;
  r.overall.tcpwer = std::stod(fixture::kDevOverall) / 100;
  const auto ls = lines(render_report(r));
  REQUIRE(ls.size() == fixture::kDevColumn.size() + 4);
  for (std::size_t k = 0; k < fixture::kDevColumn.size(); ++k) {
    const auto f = fields(ls[k + 2]);
    CHECK(f[0] == fixture::kDevColumn[k].first);
    CHECK(f[1] == fixture::kDevColumn[k].second);
  }
  CHECK(fields(ls.back())[1] == fixture::kDevOverall);
}

TEST_CASE("render_report edge cases") {
  ScoreReport empty;
  const auto ls = lines(render_report(empty));
  REQUIRE(ls.size() == 4);
  CHECK(fields(ls[3]) == std::vector<std::string>{"Overall", "-"});

  ScoreReport one;
  one.rows = {ReportRow{"Thai", 1, 2, 3, 40, 2, 0.15}};
  one.overall = ReportRow{"Overall", 1, 2, 3, 40, 2, 0.15};
  const auto l1 = lines(render_report(one));
  auto a = fields(l1[2]), b = fields(l1[4]);
  a.erase(a.begin());
  b.erase(b.begin());
  CHECK(a == b);

  ScoreReport big;
  big.rows = {row("Portuguese", 1.1884)};
  big.overall.tcpwer = 1.1884;
  CHECK(fields(lines(render_report(big))[2])[1] == "118.84");
}

TEST_CASE("render_report lists failed sessions") {
  ScoreReport r;
  r.sessions = {{"s1", "Thai", SessionStatus::State::kScored, "", 0.0},
                {"s2", "Thai", SessionStatus::State::kFailed, "backend timed out", std::nullopt}};
  const auto text = render_report(r);
  CHECK(text.find("1 session(s) failed") != std::string::npos);
  CHECK(text.find("s2: backend timed out") != std::string::npos);
}

TEST_CASE("report JSON round trip") {
  ScoreReport r;
  r.rows = {ReportRow{"French", 1, 2, 3, 40, 2, 0.15}, ReportRow{"Thai", 0, 0, 0, 0, 0, std::nullopt}};
  r.overall = ReportRow{"Overall", 1, 2, 3, 40, 2, 0.15};
  r.mode = AverageMode::kMacro;
  r.collar = 5.0;
  r.sessions = {{"a", "French", SessionStatus::State::kScored, "", 0.15},
                {"b", "Thai", SessionStatus::State::kFailed, "boom", std::nullopt},
                {"c", "Thai", SessionStatus::State::kUnscored, "", std::nullopt}};
  const auto j = report_to_json(r);
  CHECK(report_from_json(nlohmann::json::parse(j.dump())) == r);
  CHECK(j.begin().key() == "metric");
  CHECK_THROWS_AS(report_from_json(nlohmann::json::parse(R"({"rows": 3})")), FormatError);
}
