#include <doctest.h>

#include "fixture.hpp"
#include "mlcslm/backend.hpp"
#include "mlcslm/error.hpp"
#include "mlcslm/process.hpp"

using namespace mlcslm;
namespace fs = std::filesystem;
using namespace std::chrono_literals;

namespace {

DecodingRequest request() {
  return {"s1/0", "s1", "/a.wav", LanguageId("Thai"), 0.0, 30.0,
          {SpeakerTriplet("A", 1, 5, {1.0f}), SpeakerTriplet("B", 4, 9, {0.0f})}};
}

}  // namespace

TEST_CASE("decode_backend_response accepts a valid answer") {
  const auto segs = decode_backend_response(
      R"({"id":"s1/0","segments":[{"speaker":"A","start":1.0,"end":5.0,"text":"hi"},)"
      R"({"speaker":"B","start":0.0,"end":30.1,"text":"there"}]})",
      request());
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].session_id == "s1");
  CHECK(segs[0].language == LanguageId("Thai"));
  CHECK(segs[1].text == "there");
}

TEST_CASE("decode_backend_response protocol errors") {
  const auto r = request();
  auto fails = [&](const std::string& line) {
    CHECK_THROWS_AS(decode_backend_response(line, r), ProtocolError);
  };
  fails(R"({"id":"s1/0","segments":[{"speaker":"Z","start":1,"end":2,"text":"x"}]})");
  fails(R"({"id":"s1/1","segments":[]})");
  fails(R"({"id":"s1/0"})");
  fails(R"({"id":"s1/0","segments":[{"speaker":"A","start":1,"end":31,"text":"x"}]})");
  fails(R"({"id":"s1/0","segments":[{"speaker":"A","start":-0.2,"end":1,"text":"x"}]})");
  fails(R"({"id":"s1/0","segments":[{"speaker":"A","start":2,"end":1,"text":"x"}]})");
  fails(R"({"id":"s1/0","segments":[{"speaker":"A","start":1,"end":2}]})");
  fails(R"({"id":"s1/0","segments":[{"speaker":"A","start":"1","end":2,"text":"x"}]})");
  fails("not json");
  fails("[]");
  CHECK_THROWS_WITH_AS(
      decode_backend_response(R"({"id":"s1/0","segments":[{"speaker":"Z","start":1,"end":2,"text":"x"}]})", r),
      doctest::Contains("Z"), ProtocolError);
}

TEST_CASE("backend_invoke against the fake backend") {
  const auto dir = fixture::scratch_dir("backend");
  write_file(dir / "ref.json",
             R"([{"session_id":"s1","speaker":"X","start_time":1.5,"end_time":4.5,"words":"hello"}])");
  const std::string echo = fixture::kBackend + " echo " + (dir / "ref.json").string();
  const auto segs = backend_invoke(request(), echo, 5000ms);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].speaker == "A");
  CHECK(segs[0].text == "hello");

  CHECK(backend_invoke(request(), fixture::kBackend + " empty", 5000ms).empty());
  CHECK_THROWS_AS(backend_invoke(request(), fixture::kBackend + " bad-speaker", 5000ms), ProtocolError);
  CHECK_THROWS_AS(backend_invoke(request(), fixture::kBackend + " bad-id", 5000ms), ProtocolError);
  CHECK_THROWS_AS(backend_invoke(request(), fixture::kBackend + " garbage", 5000ms), ProtocolError);
  CHECK_THROWS_WITH_AS(backend_invoke(request(), fixture::kBackend + " exit", 5000ms),
                       doctest::Contains("exited"), ProcessError);
  CHECK_THROWS_WITH_AS(backend_invoke(request(), fixture::kBackend + " slow 3000", 200ms),
                       doctest::Contains("timed out"), ProcessError);
  fs::remove_all(dir);
}

TEST_CASE("a long-lived backend answers several requests") {
  ChildProcess p(fixture::kBackend + " empty");
  auto r = request();
  for (int k = 0; k < 5; ++k) {
    r.id = "s1/" + std::to_string(k);
    CHECK(backend_invoke(r, p, 5000ms).empty());
  }
  CHECK(p.finish() == 0);
}

TEST_CASE("run_capture") {
  CHECK(run_capture("cat", "abc\n", {}, 5000ms) == "abc\n");
  CHECK(run_capture("printf %s \"$FOO\"", "", {{"FOO", "bar"}}, 5000ms) == "bar");
  CHECK_THROWS_AS(run_capture("exit 4", "", {}, 5000ms), ProcessError);
  CHECK_THROWS_AS(run_capture("sleep 5", "", {}, 100ms), ProcessError);
}
