// Command-line front end: end-to-end runs and the standalone scorers.

#include <cmath>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlcslm/diarization_metrics.hpp"
#include "mlcslm/error.hpp"
#include "mlcslm/io.hpp"
#include "mlcslm/log.hpp"
#include "mlcslm/pipeline.hpp"
#include "mlcslm/report.hpp"
#include "mlcslm/tcp.hpp"
#include "mlcslm/triplets.hpp"

namespace {

using namespace mlcslm;

double parse_collar(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInfiniteCollar;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size() || !(v >= 0.0)) throw Error("bad collar '" + s + "'");
  return v;
}

int cmd_score_tcp(const std::string& ref_path, const std::string& hyp_path,
                  const std::string& collar_text, bool per_language, bool macro) {
  const auto ref = parse_seglst(read_file(ref_path));
  const auto hyp = parse_seglst(read_file(hyp_path));
  std::map<std::string, SessionInput> by_session;
  for (const auto& s : ref) {
    auto it = by_session.find(s.session_id);
    if (it == by_session.end())
      it = by_session.emplace(s.session_id,
                              SessionInput{s.session_id, s.language.value_or(LanguageId("Unknown")),
                                           {}, {}}).first;
    it->second.ref.push_back(s);
  }
  for (const auto& s : hyp) {
    auto it = by_session.find(s.session_id);
    if (it == by_session.end()) {
      spdlog::warn("hypothesis session '{}' has no reference; skipped", s.session_id);
      continue;
    }
    it->second.hyp.push_back(s);
  }
  std::vector<SessionInput> inputs;
  for (auto& [id, in] : by_session) inputs.push_back(std::move(in));

  const TcpConfig cfg{parse_collar(collar_text), tokenize};
  ScoreReport report = aggregate(score_sessions(inputs, cfg),
                                 macro ? AverageMode::kMacro : AverageMode::kMicro);
  report.collar = cfg.collar;
  if (!per_language) report.rows.clear();
  auto j = report_to_json(report);
  if (std::isinf(cfg.collar)) j["collar"] = "inf";
  std::cout << j.dump(2) << "\n\n" << render_report(report);
  return 0;
}

int cmd_score_der(const std::string& ref_path, const std::string& hyp_path, double collar) {
  const auto ref = parse_rttm(read_file(ref_path));
  const auto hyp = parse_rttm(read_file(hyp_path));
  const DerBreakdown b = compute_der_corpus(ref, hyp, collar);
  nlohmann::ordered_json j;
  j["missed"] = b.missed;
  j["false_alarm"] = b.false_alarm;
  j["confusion"] = b.confusion;
  j["total_ref"] = b.total_ref;
  j["der"] = b.der();
  j["collar"] = collar;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_score_eer(const std::string& trials_path) {
  const auto trials = parse_trials(read_file(trials_path));
  const EerResult r = compute_eer(trials);
  nlohmann::ordered_json j;
  j["eer"] = r.eer;
  j["threshold"] = r.threshold;
  j["trials"] = trials.size();
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_build_triplets(const std::string& rttm_path, const std::string& emb_path,
                       const std::string& manifest_path, const std::string& out_path,
                       const TripletBuildConfig& cfg) {
  cfg.validate();
  const auto sessions = load_manifest(manifest_path);
  const auto archive = read_embeddings(read_file(emb_path));
  std::map<std::string, std::vector<Segment>> by_session;
  for (auto& s : parse_rttm(read_file(rttm_path))) by_session[s.session_id].push_back(std::move(s));

  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& [id, segs] : by_session) {
    const auto it = std::find_if(sessions.begin(), sessions.end(),
                                 [&](const Session& s) { return s.session_id() == id; });
    if (it == sessions.end()) throw Error("RTTM session '" + id + "' is not in the manifest");
    const auto clean = postprocess_segments(segs, cfg);
    const auto triplets = attach_embeddings(clean, archive, cfg);
    for (const auto& r : window_requests(triplets, *it, cfg)) out.push_back(request_artifact_json(r));
  }
  write_file(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_report(const std::string& in_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(in_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("cannot parse report: ") + e.what());
  }
  std::cout << render_report(report_from_json(j));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Diarization-aware multi-speaker ASR harness: run, score and report"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline from a run.json config");
  run_cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();

  std::string ref, hyp, tcp_collar = "5.0";
  bool per_language = false, macro = false;
  auto* tcp_cmd = app.add_subcommand("score-tcp", "tcpWER between two SegLST files");
  tcp_cmd->add_option("--ref", ref, "Reference SegLST")->required();
  tcp_cmd->add_option("--hyp", hyp, "Hypothesis SegLST")->required();
  tcp_cmd->add_option("--collar", tcp_collar, "Collar in seconds, or 'inf'")->capture_default_str();
  tcp_cmd->add_flag("--per-language", per_language, "Include one row per language");
  tcp_cmd->add_flag("--macro", macro, "Overall row as the mean of language rates");

  double der_collar = kDefaultDerCollar;
  auto* der_cmd = app.add_subcommand("score-der", "Diarization error rate between two RTTM files");
  der_cmd->add_option("--ref", ref, "Reference RTTM")->required();
  der_cmd->add_option("--hyp", hyp, "Hypothesis RTTM")->required();
  der_cmd->add_option("--collar", der_collar, "No-score collar in seconds")->capture_default_str();

  std::string trials;
  auto* eer_cmd = app.add_subcommand("score-eer", "Equal error rate of a trial list");
  eer_cmd->add_option("--trials", trials, "Lines of '<target|nontarget> <score>'")->required();

  std::string rttm, emb, manifest, out;
  std::string key_scheme = "speaker";
  TripletBuildConfig tcfg;
  auto* bt_cmd = app.add_subcommand("build-triplets", "Diarization + embeddings -> decoding requests");
  bt_cmd->add_option("--rttm", rttm, "Diarization RTTM")->required();
  bt_cmd->add_option("--embeddings", emb, "EMB1 embedding archive")->required();
  bt_cmd->add_option("--manifest", manifest, "Session manifest")->required();
  bt_cmd->add_option("--out", out, "Output JSON")->required();
  bt_cmd->add_option("--min-duration", tcfg.min_duration)->capture_default_str();
  bt_cmd->add_option("--merge-gap", tcfg.merge_gap)->capture_default_str();
  bt_cmd->add_option("--window-length", tcfg.window_length)->capture_default_str();
  bt_cmd->add_option("--dim", tcfg.dim, "Embedding dimension")->capture_default_str();
  bt_cmd->add_option("--key-scheme", key_scheme, "speaker | utterance")
      ->check(CLI::IsMember({"speaker", "utterance"}))
      ->capture_default_str();

  std::string report_in;
  auto* rep_cmd = app.add_subcommand("report", "Render report.json as a text table");
  rep_cmd->add_option("--in", report_in, "report.json")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto outcome = run(load_run_config(config_path));
      std::cout << render_report(outcome.report);
      return outcome.exit_code;
    }
    if (*tcp_cmd) return cmd_score_tcp(ref, hyp, tcp_collar, per_language, macro);
    if (*der_cmd) return cmd_score_der(ref, hyp, der_collar);
    if (*eer_cmd) return cmd_score_eer(trials);
    if (*bt_cmd) {
      tcfg.key_scheme = key_scheme == "utterance" ? KeyScheme::kPerUtterance : KeyScheme::kPerSpeaker;
      return cmd_build_triplets(rttm, emb, manifest, out, tcfg);
    }
    if (*rep_cmd) return cmd_report(report_in);
  } catch (const mlcslm::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
