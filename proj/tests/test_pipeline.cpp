#include <doctest.h>

#include "fixture.hpp"
#include "mlcslm/error.hpp"
#include "mlcslm/pipeline.hpp"
#include "mlcslm/tcp.hpp"

using namespace mlcslm;
namespace fs = std::filesystem;

TEST_CASE("echo backend run scores zero and writes every artifact") {
  const auto dir = fixture::scratch_dir("pipe_echo");
  const auto tree = fixture::write_tree(dir);
  const auto outcome = run(load_run_config(tree.config));
  CHECK(outcome.exit_code == 0);
  REQUIRE(outcome.report.overall.tcpwer.has_value());
  CHECK(*outcome.report.overall.tcpwer == 0.0);
  CHECK(outcome.report.rows.size() == 2);
  CHECK(outcome.report.overall.ref_words > 0);
  for (const char* f : {"hyp.seglst.json", "report.json", "report.txt", "rttm/en_01.rttm",
                        "requests/fr_02.json"})
    CHECK(fs::exists(tree.output / f));

  // The hypothesis re-parses and re-scores to the same report.
  const auto hyp = parse_seglst(read_file(tree.output / "hyp.seglst.json"));
  const auto ref = parse_seglst(read_file(tree.reference));
  std::vector<SessionInput> inputs;
  for (const auto& s : fixture::sessions()) {
    SessionInput in{s.id, LanguageId(s.language), {}, {}};
    for (const auto& x : ref)
      if (x.session_id == s.id) in.ref.push_back(x);
    for (const auto& x : hyp)
      if (x.session_id == s.id) in.hyp.push_back(x);
    inputs.push_back(std::move(in));
  }
  const auto rescored = aggregate(serial::score_sessions(inputs, {5.0}));
  CHECK(rescored.rows == outcome.report.rows);
  CHECK(rescored.overall == outcome.report.overall);
  fs::remove_all(dir);
}

TEST_CASE("runs are deterministic across worker counts") {
  const auto d1 = fixture::scratch_dir("pipe_det1");
  const auto d2 = fixture::scratch_dir("pipe_det2");
  const auto t1 = fixture::write_tree(d1, {.workers = 1});
  const auto t2 = fixture::write_tree(d2, {.workers = 3});
  run(load_run_config(t1.config));
  run(load_run_config(t2.config));
  CHECK(read_file(t1.output / "hyp.seglst.json") == read_file(t2.output / "hyp.seglst.json"));
  CHECK(read_file(t1.output / "report.json") == read_file(t2.output / "report.json"));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("empty backend output scores as all deletions") {
  const auto dir = fixture::scratch_dir("pipe_empty");
  const auto tree = fixture::write_tree(dir, {.backend = fixture::kBackend + " empty"});
  const auto outcome = run(load_run_config(tree.config));
  CHECK(outcome.exit_code == 0);
  CHECK(*outcome.report.overall.tcpwer == 1.0);
  CHECK(outcome.report.overall.deletions == outcome.report.overall.ref_words);
  fs::remove_all(dir);
}

TEST_CASE("a failing session is isolated") {
  const auto dir = fixture::scratch_dir("pipe_fail");
  const auto tree = fixture::write_tree(
      dir, {.backend = fixture::kBackend + " fail-on fr_01 " + (dir / "ref.seglst.json").string()});
  const auto outcome = run(load_run_config(tree.config));
  CHECK(outcome.exit_code == 2);
  CHECK(outcome.report.failed_count() == 1);
  std::size_t scored = 0;
  for (const auto& s : outcome.report.sessions) {
    if (s.session_id == "fr_01") CHECK(s.state == SessionStatus::State::kFailed);
    if (s.state == SessionStatus::State::kScored) ++scored;
  }
  CHECK(scored == 2);
  CHECK(*outcome.report.overall.tcpwer == 0.0);
  CHECK(read_file(tree.output / "report.txt").find("fr_01") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("validate_config reports every violation") {
  const auto dir = fixture::scratch_dir("pipe_validate");
  const auto tree = fixture::write_tree(dir);
  auto cfg = load_run_config(tree.config);
  CHECK(validate_config(cfg).empty());

  write_file(dir / "reg_fr.json", R"({"bundles": {"English-British": "bundles/English-British.emb"}})");
  cfg.registry = dir / "reg_fr.json";
  auto v = validate_config(cfg);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("French") != std::string::npos);

  cfg.workers = 0;
  cfg.embeddings = dir / "nope.bin";
  v = validate_config(cfg);
  CHECK(v.size() == 3);
  CHECK_THROWS_AS(run(cfg), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("diarizer and embedder commands replace files") {
  const auto dir = fixture::scratch_dir("pipe_cmds");
  const auto tree = fixture::write_tree(dir);
  auto cfg = load_run_config(tree.config);
  cfg.diarizer_command = "cat " + (dir / "rttm").string() + "/\"$MLCSLM_SESSION_ID\".rttm";
  // Embedder: replay the stored archive regardless of input.
  cfg.embedder_command = "cat >/dev/null; cat " + (dir / "emb.bin").string();
  cfg.embeddings.reset();
  const auto outcome = run(cfg);
  CHECK(outcome.exit_code == 0);
  CHECK(*outcome.report.overall.tcpwer == 0.0);
  fs::remove_all(dir);
}
