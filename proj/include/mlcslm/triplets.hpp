#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlcslm/io.hpp"
#include "mlcslm/types.hpp"

namespace mlcslm {

// How segments map onto embedding archive keys.
enum class KeyScheme {
  kPerSpeaker,    // "{session}/{speaker}"
  kPerUtterance,  // "{session}/{speaker}/{i}", i = 0-based ordinal among that speaker's segments
};

struct TripletBuildConfig {
  Seconds min_duration = 0.20;
  Seconds merge_gap = 0.50;
  Seconds window_length = 30.0;
  std::size_t dim = 256;
  KeyScheme key_scheme = KeyScheme::kPerSpeaker;

  // Throws mlcslm::Error on invalid values.
  void validate() const;
};

struct DecodingRequest {
  std::string id;
  std::string session_id;
  std::string audio;
  LanguageId language;
  Seconds window_start = 0.0;
  Seconds window_end = 0.0;
  std::vector<SpeakerTriplet> triplets;  // clipped to the window, sorted by start
};

// Per speaker: merge segments separated by less than merge_gap, then drop
// those shorter than min_duration. Output sorted by (start, speaker).
std::vector<Segment> postprocess_segments(std::span<const Segment> segments,
                                          const TripletBuildConfig& cfg);

std::string embedding_key(const Segment& s, KeyScheme scheme, std::size_t ordinal);

// Looks up every segment's embedding. All missing keys are reported in a
// single mlcslm::Error; nothing is returned partially.
std::vector<SpeakerTriplet> attach_embeddings(std::span<const Segment> segments,
                                              const EmbeddingArchive& archive,
                                              const TripletBuildConfig& cfg);

// Covers [0, max end] with consecutive windows [k*W, (k+1)*W] of
// W = cfg.window_length and places each triplet, clipped, into every
// window it overlaps. Empty windows are omitted. Input must be sorted by
// start.
std::vector<DecodingRequest> window_requests(std::span<const SpeakerTriplet> triplets,
                                             const Session& session,
                                             const TripletBuildConfig& cfg);

struct SampleSpan {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  friend bool operator==(const SampleSpan&, const SampleSpan&) = default;
};

// Sample indices (floor(start*rate), ceil(end*rate)) clamped to the audio.
SampleSpan crop_span(Seconds total_duration, Seconds start, Seconds end, double sample_rate);

// Wire form sent to a backend: {id, audio, language, window, triplets}.
nlohmann::ordered_json request_to_json(const DecodingRequest& r);
// As request_to_json plus "session_id"; used for the requests/ artifacts.
nlohmann::ordered_json request_artifact_json(const DecodingRequest& r);

}  // namespace mlcslm
