#include <random>

#include <doctest.h>

#include "mlcslm/tcp.hpp"

using namespace mlcslm;

namespace {

std::vector<Segment> random_session(std::mt19937& rng, const std::string& id, const char* prefix,
                                    int segs) {
  static const char* vocab[] = {"a", "b", "c", "d"};
  std::uniform_real_distribution<double> t(0.0, 120.0), d(0.2, 10.0);
  std::vector<Segment> out;
  for (int i = 0; i < segs; ++i) {
    std::string text;
    const int words = 1 + int(rng() % 8);
    for (int k = 0; k < words; ++k) text += std::string(k ? " " : "") + vocab[rng() % 4];
    const double a = t(rng);
    out.push_back(make_segment(id, prefix + std::to_string(rng() % 4), a, a + d(rng), text));
  }
  return out;
}

}  // namespace

TEST_CASE("parallel pair cost matrix equals the serial one") {
  std::mt19937 rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    const auto ref = speaker_streams(random_session(rng, "s", "r", 12));
    const auto hyp = speaker_streams(random_session(rng, "s", "h", 12));
    for (double collar : {0.0, 5.0, kInfiniteCollar})
      CHECK(pair_cost_matrix(ref, hyp, collar) == serial::pair_cost_matrix(ref, hyp, collar));
  }
}

TEST_CASE("parallel session scoring equals the serial one") {
  std::mt19937 rng(73);
  std::vector<SessionInput> sessions;
  for (int k = 0; k < 24; ++k) {
    const std::string id = "sess" + std::to_string(k);
    sessions.push_back({id, LanguageId(k % 2 ? "French" : "Thai"), random_session(rng, id, "r", 6),
                        random_session(rng, id, "h", 6)});
  }
  const auto a = score_sessions(sessions, {2.0});
  const auto b = serial::score_sessions(sessions, {2.0});
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].session_id == b[i].session_id);
    CHECK(a[i].result.counts == b[i].result.counts);
    CHECK(a[i].result.ref_words == b[i].result.ref_words);
    CHECK(a[i].result.assignment == b[i].result.assignment);
  }
}

TEST_CASE("session scoring propagates a failing session") {
  std::vector<SessionInput> sessions{
      {"ok", LanguageId("Thai"), {make_segment("ok", "A", 0, 1, "a")}, {}},
      {"bad", LanguageId("Thai"), {}, {make_segment("bad", "A", 0, 1, "a")}}};
  CHECK_THROWS(score_sessions(sessions));
  CHECK_THROWS(serial::score_sessions(sessions));
}
