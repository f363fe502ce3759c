#include "mlcslm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <memory>
#include <set>
#include <thread>

#include <json.hpp>

#include "mlcslm/adapters.hpp"
#include "mlcslm/backend.hpp"
#include "mlcslm/io.hpp"
#include "mlcslm/log.hpp"
#include "mlcslm/process.hpp"

namespace mlcslm {

namespace fs = std::filesystem;

namespace {

std::string join_lines(const std::vector<std::string>& v) {
  std::string out = "invalid run configuration:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

std::string file_stem_for(const std::string& session_id) {
  std::string out = session_id;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')) c = '_';
  return out;
}

bool segment_order(const Segment& a, const Segment& b) {
  return std::tie(a.session_id, a.start, a.end, a.speaker) <
         std::tie(b.session_id, b.start, b.end, b.speaker);
}

struct RunContext {
  const RunConfig& config;
  std::optional<EmbeddingArchive> archive;
  std::optional<LoadedRegistry> registry;
};

struct SessionResult {
  std::vector<Segment> hyp;
  std::optional<std::string> error;
};

std::vector<Segment> diarize(const Session& s, const RunContext& ctx) {
  std::vector<Segment> segs;
  if (ctx.config.diarizer_command) {
    const EnvVars env{{"MLCSLM_SESSION_ID", s.session_id()}, {"MLCSLM_AUDIO", s.audio()}};
    segs = parse_rttm(run_capture(*ctx.config.diarizer_command, "", env,
                                  ctx.config.backend_timeout));
  } else {
    segs = parse_rttm(read_file(*s.rttm_path()));
  }
  std::erase_if(segs, [&](const Segment& x) { return x.session_id != s.session_id(); });
  return segs;
}

EmbeddingArchive session_embeddings(const Session& s, const std::vector<Segment>& segs,
                                    const RunContext& ctx) {
  if (ctx.archive) return *ctx.archive;
  const EnvVars env{{"MLCSLM_SESSION_ID", s.session_id()}, {"MLCSLM_AUDIO", s.audio()}};
  return read_embeddings(run_capture(*ctx.config.embedder_command, write_rttm(segs), env,
                                     ctx.config.backend_timeout));
}

SessionResult process_session(const Session& s, const RunContext& ctx,
                              std::unique_ptr<ChildProcess>& backend) {
  const RunConfig& cfg = ctx.config;
  const std::string stem = file_stem_for(s.session_id());
  SessionResult result;
  try {
    const auto segs = postprocess_segments(diarize(s, ctx), cfg.triplets);
    write_file(cfg.output_dir / "rttm" / (stem + ".rttm"), write_rttm(segs));

    if (ctx.registry) {
      const AdapterBundle& b =
          route(ctx.registry->registry, s.language(),
                ctx.registry->fallback ? &*ctx.registry->fallback : nullptr);
      spdlog::info("{}: language {} routed to bundle {}", s.session_id(), s.language().str(),
                   b.source.empty() ? b.language.str() : b.source);
    }

    const auto triplets = attach_embeddings(segs, session_embeddings(s, segs, ctx), cfg.triplets);
    const auto requests = window_requests(triplets, s, cfg.triplets);
    nlohmann::ordered_json req_json = nlohmann::ordered_json::array();
    for (const auto& r : requests) req_json.push_back(request_artifact_json(r));
    write_file(cfg.output_dir / "requests" / (stem + ".json"), req_json.dump(2) + "\n");

    for (const auto& r : requests) {
      if (!backend) backend = std::make_unique<ChildProcess>(cfg.backend_command);
      auto segments = backend_invoke(r, *backend, cfg.backend_timeout);
      spdlog::debug("{}: {} segments", r.id, segments.size());
      result.hyp.insert(result.hyp.end(), std::make_move_iterator(segments.begin()),
                        std::make_move_iterator(segments.end()));
    }
    std::sort(result.hyp.begin(), result.hyp.end(), segment_order);
  } catch (const std::exception& e) {
    spdlog::warn("{}: {}", s.session_id(), e.what());
    result.hyp.clear();
    result.error = e.what();
    backend.reset();  // the process may be mid-reply; start fresh next time
  }
  return result;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join_lines(violations)), violations_(std::move(violations)) {}

RunConfig load_run_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({"cannot parse " + path.string() + ": " + e.what()});
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path q(p);
    return (q.is_absolute() ? q : base / q).lexically_normal();
  };
  RunConfig c;
  try {
    c.manifest = resolve(j.at("manifest").get<std::string>());
    if (j.contains("diarizer_command")) c.diarizer_command = j["diarizer_command"].get<std::string>();
    if (j.contains("embeddings")) c.embeddings = resolve(j["embeddings"].get<std::string>());
    if (j.contains("embedder_command")) c.embedder_command = j["embedder_command"].get<std::string>();
    c.backend_command = j.at("backend_command").get<std::string>();
    c.collar = j.value("collar", kDefaultTcpCollar);
    const std::string avg = j.value("average", std::string("micro"));
    if (avg != "micro" && avg != "macro") throw ConfigError({"unknown average '" + avg + "'"});
    c.average = avg == "micro" ? AverageMode::kMicro : AverageMode::kMacro;
    if (j.contains("triplets")) {
      const auto& t = j["triplets"];
      c.triplets.min_duration = t.value("min_duration", c.triplets.min_duration);
      c.triplets.merge_gap = t.value("merge_gap", c.triplets.merge_gap);
      c.triplets.window_length = t.value("window_length", c.triplets.window_length);
      c.triplets.dim = t.value("dim", c.triplets.dim);
      const std::string scheme = t.value("key_scheme", std::string("speaker"));
      if (scheme == "speaker") c.triplets.key_scheme = KeyScheme::kPerSpeaker;
      else if (scheme == "utterance") c.triplets.key_scheme = KeyScheme::kPerUtterance;
      else throw ConfigError({"unknown key_scheme '" + scheme + "'"});
    }
    if (j.contains("registry")) c.registry = resolve(j["registry"].get<std::string>());
    c.output_dir = resolve(j.value("output_dir", std::string("out")));
    const auto workers = j.value("workers", 1LL);
    if (workers < 1) throw ConfigError({"workers must be >= 1"});
    c.workers = static_cast<std::size_t>(workers);
    const double timeout_s = j.value("backend_timeout", 300.0);
    c.backend_timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({"bad field in " + path.string() + ": " + e.what()});
  }
  return c;
}

std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> v;
  if (c.workers < 1) v.push_back("worker count must be >= 1");
  if (!(c.collar >= 0.0)) v.push_back("collar must be >= 0");
  try {
    c.triplets.validate();
  } catch (const Error& e) {
    v.push_back(std::string("triplets: ") + e.what());
  }
  if (c.backend_command.empty()) v.push_back("backend_command is empty");
  if (c.embeddings.has_value() == c.embedder_command.has_value())
    v.push_back("exactly one of embeddings / embedder_command must be set");
  if (c.embeddings && !fs::exists(*c.embeddings))
    v.push_back("embeddings file not found: " + c.embeddings->string());
  if (c.output_dir.empty()) v.push_back("output_dir is empty");

  std::vector<Session> sessions;
  if (!fs::exists(c.manifest)) {
    v.push_back("manifest not found: " + c.manifest.string());
  } else {
    try {
      sessions = load_manifest(c.manifest);
    } catch (const Error& e) {
      v.push_back("manifest " + c.manifest.string() + ": " + e.what());
    }
  }
  for (const auto& s : sessions) {
    if (!c.diarizer_command) {
      if (!s.rttm_path()) v.push_back("session " + s.session_id() + " has no rttm and no diarizer_command is set");
      else if (!fs::exists(*s.rttm_path())) v.push_back("rttm not found: " + *s.rttm_path());
    }
    if (s.reference_path() && !fs::exists(*s.reference_path()))
      v.push_back("reference not found: " + *s.reference_path());
  }

  if (c.registry) {
    if (!fs::exists(*c.registry)) {
      v.push_back("registry not found: " + c.registry->string());
    } else {
      try {
        const RegistryIndex idx = read_registry_index(*c.registry);
        for (const auto& [lang, p] : idx.bundles)
          if (!fs::exists(p)) v.push_back("bundle for " + lang + " not found: " + p.string());
        if (idx.fallback && !fs::exists(*idx.fallback))
          v.push_back("fallback bundle not found: " + idx.fallback->string());
        if (!idx.fallback) {
          std::set<std::string> missing;
          for (const auto& s : sessions)
            if (!idx.bundles.contains(s.language().str())) missing.insert(s.language().str());
          for (const auto& lang : missing)
            v.push_back("registry has no bundle for language " + lang + " and no fallback");
        }
      } catch (const Error& e) {
        v.push_back("registry: " + std::string(e.what()));
      }
    }
  }
  return v;
}

RunOutcome run(const RunConfig& config) {
  init_logging();
  if (auto v = validate_config(config); !v.empty()) throw ConfigError(std::move(v));

  std::vector<Session> sessions = load_manifest(config.manifest);
  std::sort(sessions.begin(), sessions.end(),
            [](const Session& a, const Session& b) { return a.session_id() < b.session_id(); });

  RunContext ctx{config, std::nullopt, std::nullopt};
  try {
    if (config.embeddings) ctx.archive = read_embeddings(read_file(*config.embeddings));
    if (config.registry) ctx.registry = load_registry(*config.registry);
  } catch (const Error& e) {
    throw ConfigError({e.what()});
  }
  fs::create_directories(config.output_dir);

  // Each worker owns one backend process; results land in per-session slots.
  std::vector<SessionResult> results(sessions.size());
  std::atomic<std::size_t> next{0};
  const std::size_t n_workers = std::min(config.workers, std::max<std::size_t>(sessions.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        std::unique_ptr<ChildProcess> backend;
        for (std::size_t i = next++; i < sessions.size(); i = next++) {
          spdlog::info("session {} ({}/{})", sessions[i].session_id(), i + 1, sessions.size());
          results[i] = process_session(sessions[i], ctx, backend);
        }
        if (backend) backend->finish();
      });
  }

  std::vector<Segment> all_hyp;
  for (const auto& r : results) all_hyp.insert(all_hyp.end(), r.hyp.begin(), r.hyp.end());
  std::sort(all_hyp.begin(), all_hyp.end(), segment_order);
  write_file(config.output_dir / "hyp.seglst.json", write_seglst(all_hyp) + "\n");

  // Scoring.
  std::map<std::string, std::vector<Segment>> ref_cache;
  std::vector<SessionInput> to_score;
  std::vector<SessionStatus> statuses(sessions.size());
  std::vector<std::size_t> score_slot;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const Session& s = sessions[i];
    SessionStatus& st = statuses[i];
    st.session_id = s.session_id();
    st.language = s.language().str();
    if (results[i].error) {
      st.state = SessionStatus::State::kFailed;
      st.error = *results[i].error;
      continue;
    }
    if (!s.reference_path()) {
      st.state = SessionStatus::State::kUnscored;
      continue;
    }
    try {
      auto it = ref_cache.find(*s.reference_path());
      if (it == ref_cache.end())
        it = ref_cache.emplace(*s.reference_path(), parse_seglst(read_file(*s.reference_path()))).first;
      std::vector<Segment> ref;
      for (const auto& seg : it->second)
        if (seg.session_id == s.session_id()) ref.push_back(seg);
      to_score.push_back(SessionInput{s.session_id(), s.language(), std::move(ref), results[i].hyp});
      score_slot.push_back(i);
    } catch (const std::exception& e) {
      st.state = SessionStatus::State::kFailed;
      st.error = std::string("reference: ") + e.what();
    }
  }

  std::vector<SessionScore> scores;
  const TcpConfig tcp{config.collar, tokenize};
  try {
    scores = score_sessions(to_score, tcp);
    for (std::size_t k = 0; k < scores.size(); ++k)
      statuses[score_slot[k]].tcpwer = scores[k].result.tcpwer();
  } catch (const Error&) {
    // Some session is unscoreable; redo one by one to isolate it.
    scores.clear();
    for (std::size_t k = 0; k < to_score.size(); ++k) {
      try {
        auto one = serial::score_sessions(std::span(&to_score[k], 1), tcp);
        statuses[score_slot[k]].tcpwer = one.front().result.tcpwer();
        scores.push_back(std::move(one.front()));
      } catch (const std::exception& e) {
        statuses[score_slot[k]].state = SessionStatus::State::kFailed;
        statuses[score_slot[k]].error = std::string("scoring: ") + e.what();
      }
    }
  }

  RunOutcome outcome;
  outcome.report = aggregate(std::move(scores), config.average);
  outcome.report.collar = config.collar;
  outcome.report.sessions = std::move(statuses);
  write_file(config.output_dir / "report.json", report_to_json(outcome.report).dump(2) + "\n");
  write_file(config.output_dir / "report.txt", render_report(outcome.report));
  outcome.exit_code = outcome.report.failed_count() > 0 ? 2 : 0;
  return outcome;
}

}  // namespace mlcslm
