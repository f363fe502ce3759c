#pragma once

// A small on-disk corpus for end-to-end runs: three sessions in two
// languages, reference transcripts, diarization with permuted speaker
// labels, an embedding archive, per-language parameter bundles and a
// run.json pointing at all of it.

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlcslm/adapters.hpp"
#include "mlcslm/io.hpp"

#ifndef FAKE_BACKEND_PATH
#error "FAKE_BACKEND_PATH must point at the fake_backend executable"
#endif

namespace fixture {

namespace fs = std::filesystem;
using mlcslm::LanguageId;
using mlcslm::Segment;

inline const std::string kBackend = FAKE_BACKEND_PATH;

// Fresh empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mlcslm_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct SessionSpec {
  std::string id;
  std::string language;
  std::vector<std::tuple<std::string, double, double, std::string>> turns;
};

inline std::vector<SessionSpec> sessions() {
  return {
      {"en_01",
       "English-British",
       {{"A", 0.5, 4.0, "good morning everyone"},
        {"B", 3.5, 9.5, "morning how are you today"},
        {"A", 10.2, 14.0, "fine thanks"},
        {"B", 31.0, 35.5, "shall we start"},
        {"A", 36.0, 41.0, "yes let us begin the meeting"}}},
      {"fr_01",
       "French",
       {{"A", 0.0, 3.0, "bonjour tout le monde"},
        {"C", 3.2, 6.0, "salut"},
        {"B", 6.5, 12.0, "on commence quand vous voulez"},
        {"C", 12.5, 16.0, "oui allons y"},
        {"A", 33.0, 38.0, "merci beaucoup"}}},
      {"fr_02",
       "French",
       {{"A", 1.0, 5.0, "il fait beau aujourd'hui"},
        {"B", 5.5, 9.0, "c'est vrai"},
        {"A", 9.6, 14.0, "on sort ce soir"}}},
  };
}

inline std::vector<Segment> reference_segments() {
  std::vector<Segment> out;
  for (const auto& s : sessions())
    for (const auto& [spk, a, b, text] : s.turns)
      out.push_back(mlcslm::make_segment(s.id, spk, a, b, text, LanguageId(s.language)));
  return out;
}

// Diarizer output: the reference turns under other labels.
inline std::string diarized_label(const std::string& spk) {
  return spk == "A" ? "spk2" : spk == "B" ? "spk0" : "spk1";
}

inline mlcslm::AdapterBundle make_bundle(const LanguageId& lang, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  auto fill = [&](Eigen::Index r, Eigen::Index c) {
    mlcslm::Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
    return m;
  };
  mlcslm::AdapterBundle b{lang, 2, {}, {}, ""};
  b.adapter.w1 = fill(8, 3);
  b.adapter.b1 = fill(3, 1).col(0);
  b.adapter.w2 = fill(3, 2);
  b.adapter.b2 = fill(2, 1).col(0);
  b.adapter.activation = mlcslm::Activation::kGeluTanh;
  mlcslm::LoraDelta d;
  d.a = fill(1, 4);
  d.b = fill(4, 1);
  d.alpha = 2.0;
  b.loras.emplace_back("q_proj", d);
  return b;
}

struct Tree {
  fs::path dir;
  fs::path config;
  fs::path reference;
  fs::path output;
};

struct Options {
  std::string backend = kBackend + " echo";  // the reference path is appended for echo
  int workers = 2;
  bool registry = true;
};

inline Tree write_tree(const fs::path& dir, const Options& opt = {}) {
  Tree t{dir, dir / "run.json", dir / "ref.seglst.json", dir / "out"};
  const auto ref = reference_segments();
  mlcslm::write_file(t.reference, mlcslm::write_seglst(ref));

  nlohmann::json manifest = nlohmann::json::array();
  mlcslm::EmbeddingArchive archive(8);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  for (const auto& s : sessions()) {
    std::vector<Segment> diar;
    for (const auto& [spk, a, b, text] : s.turns)
      diar.push_back(mlcslm::make_segment(s.id, diarized_label(spk), a, b));
    mlcslm::write_file(dir / "rttm" / (s.id + ".rttm"), mlcslm::write_rttm(diar));
    for (const std::string spk : {"spk0", "spk1", "spk2"}) {
      std::vector<float> v(8);
      for (auto& x : v) x = u(rng);
      archive.add(s.id + "/" + spk, std::move(v));
    }
    manifest.push_back({{"session_id", s.id},
                        {"audio", "audio/" + s.id + ".wav"},
                        {"language", s.language},
                        {"reference", "ref.seglst.json"},
                        {"rttm", "rttm/" + s.id + ".rttm"}});
  }
  mlcslm::write_file(dir / "manifest.json", manifest.dump(2));
  mlcslm::write_file(dir / "emb.bin", mlcslm::write_embeddings(archive));

  nlohmann::json run{{"manifest", "manifest.json"},
                     {"embeddings", "emb.bin"},
                     {"collar", 5.0},
                     {"triplets", {{"dim", 8}, {"window_length", 30.0}}},
                     {"output_dir", "out"},
                     {"workers", opt.workers},
                     {"backend_timeout", 20.0}};
  run["backend_command"] =
      opt.backend == kBackend + " echo" ? opt.backend + " " + t.reference.string() : opt.backend;

  if (opt.registry) {
    nlohmann::json reg{{"bundles", nlohmann::json::object()}};
    for (const std::string lang : {"French", "English-British"}) {
      const auto pf = mlcslm::bundle_to_param_file(make_bundle(LanguageId(lang), rng));
      const std::string rel = "bundles/" + lang + ".emb";
      mlcslm::write_param_file(dir / rel, pf.tensors, pf.meta, 4);
      reg["bundles"][lang] = rel;
    }
    mlcslm::write_file(dir / "registry.json", reg.dump(2));
    run["registry"] = "registry.json";
  }
  mlcslm::write_file(t.config, run.dump(2));
  return t;
}

}  // namespace fixture
