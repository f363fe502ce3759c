#include <map>
#include <random>

#include <doctest.h>

#include "mlcslm/error.hpp"
#include "mlcslm/triplets.hpp"

using namespace mlcslm;

namespace {

Segment seg(const std::string& spk, double a, double b) { return make_segment("s1", spk, a, b); }

std::vector<Segment> random_segments(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> t(0.0, 100.0), d(0.01, 5.0);
  std::vector<Segment> out;
  for (int i = 0; i < n; ++i) {
    const double a = t(rng);
    out.push_back(seg(std::string(1, char('A' + rng() % 3)), a, a + d(rng)));
  }
  return out;
}

TripletBuildConfig config(double min_duration = 0.2, double merge_gap = 0.5) {
  TripletBuildConfig c;
  c.min_duration = min_duration;
  c.merge_gap = merge_gap;
  c.dim = 2;
  return c;
}

}  // namespace

TEST_CASE("postprocess_segments examples") {
  const auto cfg = config();
  std::vector<Segment> in{seg("A", 0, 1), seg("A", 1.2, 2)};
  auto out = postprocess_segments(in, cfg);
  REQUIRE(out.size() == 1);
  CHECK(out[0].start == 0.0);
  CHECK(out[0].end == 2.0);

  in = {seg("A", 0, 0.1)};
  CHECK(postprocess_segments(in, cfg).empty());

  in = {seg("A", 0, 1), seg("A", 2, 3)};
  CHECK(postprocess_segments(in, cfg) == in);
}

TEST_CASE("postprocess_segments keeps speakers apart and joins text") {
  std::vector<Segment> in{seg("B", 0.5, 1), seg("A", 0, 1), seg("A", 1.1, 2)};
  in[1].text = "hello";
  in[2].text = "world";
  const auto out = postprocess_segments(in, config());
  REQUIRE(out.size() == 2);
  CHECK(out[0].speaker == "A");
  CHECK(out[0].text == "hello world");
  CHECK(out[1].speaker == "B");
}

TEST_CASE("postprocess_segments properties") {
  std::mt19937 rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const auto cfg = config(0.05 * double(rng() % 8), 0.25 * double(rng() % 6));
    const auto in = random_segments(rng, 1 + int(rng() % 30));
    const auto once = postprocess_segments(in, cfg);
    CHECK(postprocess_segments(once, cfg) == once);

    for (std::size_t i = 0; i + 1 < once.size(); ++i) {
      const bool ordered = once[i].start < once[i + 1].start ||
                           (once[i].start == once[i + 1].start &&
                            once[i].speaker <= once[i + 1].speaker);
      CHECK(ordered);
    }
    for (std::size_t i = 0; i < once.size(); ++i)
      for (std::size_t j = i + 1; j < once.size(); ++j)
        if (once[i].speaker == once[j].speaker)
          CHECK((once[i].end < once[j].start || once[j].end < once[i].start));

    for (const auto& s : in) {
      if (s.duration() < cfg.min_duration) continue;
      int covering = 0;
      for (const auto& o : once)
        if (o.speaker == s.speaker && o.start <= s.start && s.end <= o.end) ++covering;
      CHECK(covering == 1);
    }
  }
}

TEST_CASE("attach_embeddings") {
  EmbeddingArchive archive(2);
  archive.add("s1/A", {1.0f, 0.0f});
  const auto cfg = config();
  const std::vector<Segment> one{seg("A", 0, 1)};
  const auto t = attach_embeddings(one, archive, cfg);
  REQUIRE(t.size() == 1);
  CHECK(std::vector<float>(t[0].embedding().begin(), t[0].embedding().end()) ==
        std::vector<float>{1.0f, 0.0f});

  const std::vector<Segment> two{seg("A", 0, 1), seg("A", 2, 3)};
  const auto shared = attach_embeddings(two, archive, cfg);
  REQUIRE(shared.size() == 2);
  CHECK(std::memcmp(shared[0].embedding().data(), shared[1].embedding().data(),
                    2 * sizeof(float)) == 0);

  const std::vector<Segment> missing{seg("A", 0, 1), seg("B", 1, 2), seg("C", 2, 3)};
  CHECK_THROWS_WITH_AS(attach_embeddings(missing, archive, cfg),
                       doctest::Contains("s1/B s1/C"), Error);
  const std::vector<Segment> absent{seg("B", 0, 1)};
  CHECK_THROWS_WITH_AS(attach_embeddings(absent, EmbeddingArchive(2), cfg),
                       doctest::Contains("s1/B"), Error);

  auto wrong_dim = cfg;
  wrong_dim.dim = 3;
  CHECK_THROWS_AS(attach_embeddings(one, archive, wrong_dim), Error);
}

TEST_CASE("attach_embeddings per utterance") {
  EmbeddingArchive archive(1);
  archive.add("s1/A/0", {1.0f});
  archive.add("s1/A/1", {2.0f});
  archive.add("s1/B/0", {3.0f});
  auto cfg = config();
  cfg.dim = 1;
  cfg.key_scheme = KeyScheme::kPerUtterance;
  const std::vector<Segment> segs{seg("A", 0, 1), seg("B", 0.5, 1), seg("A", 2, 3)};
  const auto t = attach_embeddings(segs, archive, cfg);
  CHECK(t[0].embedding()[0] == 1.0f);
  CHECK(t[1].embedding()[0] == 3.0f);
  CHECK(t[2].embedding()[0] == 2.0f);
}

TEST_CASE("window_requests examples") {
  const Session session("s1", "/a.wav", LanguageId("Korean"));
  auto cfg = config();
  cfg.window_length = 30.0;

  const std::vector<SpeakerTriplet> one{{"A", 5, 10, {1.0f}}};
  auto r = window_requests(one, session, cfg);
  REQUIRE(r.size() == 1);
  CHECK(r[0].window_start == 0.0);
  CHECK(r[0].window_end == 30.0);
  CHECK(r[0].id == "s1/0");
  CHECK(r[0].audio == "/a.wav");

  const std::vector<SpeakerTriplet> straddle{{"A", 25, 35, {1.0f}}};
  r = window_requests(straddle, session, cfg);
  REQUIRE(r.size() == 2);
  CHECK(r[0].triplets[0].start() == 25.0);
  CHECK(r[0].triplets[0].end() == 30.0);
  CHECK(r[1].window_start == 30.0);
  CHECK(r[1].window_end == 60.0);
  CHECK(r[1].triplets[0].start() == 30.0);
  CHECK(r[1].triplets[0].end() == 35.0);

  CHECK(window_requests({}, session, cfg).empty());

  const std::vector<SpeakerTriplet> unsorted{{"A", 5, 6, {1.0f}}, {"B", 1, 2, {1.0f}}};
  CHECK_THROWS_AS(window_requests(unsorted, session, cfg), Error);
}

TEST_CASE("window pieces tile each triplet exactly") {
  std::mt19937 rng(89);
  const Session session("s1", "/a.wav", LanguageId("Korean"));
  for (int trial = 0; trial < 200; ++trial) {
    auto cfg = config();
    cfg.window_length = 1.0 + double(rng() % 40);
    std::vector<SpeakerTriplet> ts;
    for (const auto& s : random_segments(rng, 1 + int(rng() % 10)))
      ts.emplace_back(s.speaker, s.start, s.end, std::vector<float>{1.0f});
    std::sort(ts.begin(), ts.end(), [](const auto& a, const auto& b) { return a.start() < b.start(); });
    // Unique labels make every piece attributable to one triplet.
    for (std::size_t i = 0; i < ts.size(); ++i)
      ts[i] = SpeakerTriplet("t" + std::to_string(i), ts[i].start(), ts[i].end(), {1.0f});
    const auto reqs = window_requests(ts, session, cfg);

    std::map<std::string, std::vector<std::pair<double, double>>> pieces;
    for (const auto& r : reqs) {
      CHECK_FALSE(r.triplets.empty());
      CHECK(r.window_end - r.window_start == cfg.window_length);
      for (std::size_t k = 0; k < r.triplets.size(); ++k) {
        CHECK(r.triplets[k].start() >= r.window_start);
        CHECK(r.triplets[k].end() <= r.window_end);
        if (k) CHECK(r.triplets[k - 1].start() <= r.triplets[k].start());
        pieces[r.triplets[k].speaker()].emplace_back(r.triplets[k].start(), r.triplets[k].end());
      }
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
      auto& ps = pieces["t" + std::to_string(i)];
      std::sort(ps.begin(), ps.end());
      REQUIRE_FALSE(ps.empty());
      CHECK(ps.front().first == ts[i].start());
      CHECK(ps.back().second == ts[i].end());
      for (std::size_t k = 0; k + 1 < ps.size(); ++k) CHECK(ps[k].second == ps[k + 1].first);
    }
  }
}

TEST_CASE("crop_span") {
  CHECK(crop_span(10.0, 0.5, 2.0, 16000) == SampleSpan{8000, 32000});
  CHECK(crop_span(10.0, 0.0, 10.0, 16000) == SampleSpan{0, 160000});
  CHECK_THROWS_AS(crop_span(10.0, 5.0, 11.0, 16000), Error);
  CHECK_THROWS_AS(crop_span(10.0, 5.0, 5.0, 16000), Error);
  CHECK(crop_span(1.00003, 0.0, 1.00003, 16000) == SampleSpan{0, 16000});
}

TEST_CASE("request JSON wire form") {
  DecodingRequest r{"s1/0", "s1", "/a.wav", LanguageId("Thai"), 0, 30,
                    {SpeakerTriplet("A", 1, 2, {0.5f})}};
  CHECK(request_to_json(r).dump() ==
        R"({"id":"s1/0","audio":"/a.wav","language":"Thai","window":[0.0,30.0],)"
        R"("triplets":[{"speaker":"A","start":1.0,"end":2.0,"embedding":[0.5]}]})");
  CHECK(request_artifact_json(r).begin().key() == "session_id");
}
