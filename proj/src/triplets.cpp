#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "mlcslm/error.hpp"
#include "mlcslm/triplets.hpp"

namespace mlcslm {

void TripletBuildConfig::validate() const {
  if (!(min_duration >= 0) || !(merge_gap >= 0) || !(window_length >= 0))
    throw Error("triplet config values must be >= 0");
  if (!(window_length > min_duration))
    throw Error("window_length must exceed min_duration");
  if (dim == 0) throw Error("embedding dimension must be positive");
}

std::vector<Segment> postprocess_segments(std::span<const Segment> segments,
                                          const TripletBuildConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::vector<Segment>> by_speaker;
  for (const auto& s : segments) {
    if (!segments.empty() && s.session_id != segments.front().session_id)
      throw Error("postprocess_segments expects a single session");
    by_speaker[s.speaker].push_back(s);
  }
  std::vector<Segment> out;
  for (auto& [speaker, segs] : by_speaker) {
    std::stable_sort(segs.begin(), segs.end(),
                     [](const Segment& a, const Segment& b) { return a.start < b.start; });
    std::vector<Segment> merged;
    for (auto& s : segs) {
      if (!merged.empty() && s.start - merged.back().end < cfg.merge_gap) {
        Segment& m = merged.back();
        m.end = std::max(m.end, s.end);
        if (s.text) m.text = m.text ? *m.text + " " + *s.text : *s.text;
        if (!m.language) m.language = s.language;
      } else {
        merged.push_back(std::move(s));
      }
    }
    for (auto& m : merged)
      if (m.duration() >= cfg.min_duration) out.push_back(std::move(m));
  }
  std::stable_sort(out.begin(), out.end(), [](const Segment& a, const Segment& b) {
    return std::tie(a.start, a.speaker) < std::tie(b.start, b.speaker);
  });
  return out;
}

std::string embedding_key(const Segment& s, KeyScheme scheme, std::size_t ordinal) {
  std::string key = s.session_id + "/" + s.speaker;
  if (scheme == KeyScheme::kPerUtterance) key += "/" + std::to_string(ordinal);
  return key;
}

std::vector<SpeakerTriplet> attach_embeddings(std::span<const Segment> segments,
                                              const EmbeddingArchive& archive,
                                              const TripletBuildConfig& cfg) {
  if (archive.dim() != cfg.dim)
    throw Error("embedding archive has dim " + std::to_string(archive.dim()) +
                ", configured dim is " + std::to_string(cfg.dim));
  std::map<std::pair<std::string, std::string>, std::size_t> ordinals;
  std::vector<std::string> missing;
  std::vector<const std::vector<float>*> found;
  for (const auto& s : segments) {
    const std::size_t ord = ordinals[{s.session_id, s.speaker}]++;
    const std::string key = embedding_key(s, cfg.key_scheme, ord);
    const auto* vec = archive.find(key);
    if (!vec) missing.push_back(key);
    found.push_back(vec);
  }
  if (!missing.empty()) {
    std::string msg = "missing embeddings for:";
    for (const auto& k : missing) msg += " " + k;
    throw Error(msg);
  }
  std::vector<SpeakerTriplet> out;
  out.reserve(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i)
    out.emplace_back(segments[i].speaker, segments[i].start, segments[i].end, *found[i]);
  return out;
}

std::vector<DecodingRequest> window_requests(std::span<const SpeakerTriplet> triplets,
                                             const Session& session,
                                             const TripletBuildConfig& cfg) {
  cfg.validate();
  if (!std::is_sorted(triplets.begin(), triplets.end(),
                      [](const auto& a, const auto& b) { return a.start() < b.start(); }))
    throw Error("triplets must be sorted by start time");
  if (triplets.empty()) return {};
  Seconds horizon = 0.0;
  for (const auto& t : triplets) horizon = std::max(horizon, t.end());

  std::vector<DecodingRequest> out;
  const Seconds w = cfg.window_length;
  for (std::size_t k = 0; static_cast<double>(k) * w < horizon; ++k) {
    const Seconds a = static_cast<double>(k) * w;
    const Seconds b = static_cast<double>(k + 1) * w;
    DecodingRequest req{session.session_id() + "/" + std::to_string(k),
                        session.session_id(), session.audio(), session.language(),
                        a, b, {}};
    for (const auto& t : triplets) {
      if (t.start() >= b) break;
      const Seconds lo = std::max(t.start(), a), hi = std::min(t.end(), b);
      if (lo < hi) req.triplets.push_back(t.with_interval(lo, hi));
    }
    std::stable_sort(req.triplets.begin(), req.triplets.end(), [](const auto& x, const auto& y) {
      if (x.start() != y.start()) return x.start() < y.start();
      return x.speaker() < y.speaker();
    });
    if (!req.triplets.empty()) out.push_back(std::move(req));
  }
  return out;
}

SampleSpan crop_span(Seconds total_duration, Seconds start, Seconds end, double sample_rate) {
  if (!(sample_rate > 0)) throw Error("sample rate must be positive");
  if (!(start >= 0.0 && start < end && end <= total_duration))
    throw Error("span [" + std::to_string(start) + ", " + std::to_string(end) +
                "] outside audio of " + std::to_string(total_duration) + " s");
  const auto limit = static_cast<std::int64_t>(std::floor(total_duration * sample_rate));
  const auto b = static_cast<std::int64_t>(std::floor(start * sample_rate));
  const auto e = static_cast<std::int64_t>(std::ceil(end * sample_rate));
  return {std::clamp<std::int64_t>(b, 0, limit), std::clamp<std::int64_t>(e, 0, limit)};
}

nlohmann::ordered_json request_to_json(const DecodingRequest& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["audio"] = r.audio;
  j["language"] = r.language.str();
  j["window"] = {r.window_start, r.window_end};
  j["triplets"] = nlohmann::ordered_json::array();
  for (const auto& t : r.triplets) {
    nlohmann::ordered_json tj;
    tj["speaker"] = t.speaker();
    tj["start"] = t.start();
    tj["end"] = t.end();
    tj["embedding"] = std::vector<float>(t.embedding().begin(), t.embedding().end());
    j["triplets"].push_back(std::move(tj));
  }
  return j;
}

nlohmann::ordered_json request_artifact_json(const DecodingRequest& r) {
  nlohmann::ordered_json j;
  j["session_id"] = r.session_id;
  const nlohmann::ordered_json wire = request_to_json(r);
  for (const auto& [k, v] : wire.items()) j[k] = v;
  return j;
}

}  // namespace mlcslm
