#pragma once

#include <compare>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlcslm {

using Seconds = double;

// Language category tag. Compared byte-for-byte, no case folding.
class LanguageId {
 public:
  explicit LanguageId(std::string code);

  const std::string& str() const { return code_; }

  // True for the fifteen challenge categories (English-American ... Vietnamese).
  bool is_known() const;
  bool is_english_variant() const;

  friend auto operator<=>(const LanguageId&, const LanguageId&) = default;

 private:
  std::string code_;
};

// The fifteen categories in the order a results table lists them.
std::span<const std::string_view> known_languages();

struct Segment {
  std::string session_id;
  std::string speaker;
  Seconds start = 0.0;
  Seconds end = 0.0;
  std::optional<std::string> text;
  std::optional<LanguageId> language;

  Seconds duration() const { return end - start; }

  friend bool operator==(const Segment&, const Segment&) = default;
};

// First violated invariant of `s`, or nullopt when valid.
std::optional<std::string> validate_segment(const Segment& s);

// validate_segment, throwing mlcslm::Error on violation.
Segment make_segment(std::string session_id, std::string speaker, Seconds start,
                     Seconds end, std::optional<std::string> text = std::nullopt,
                     std::optional<LanguageId> language = std::nullopt);

// (speaker, interval, embedding): a speaker-enrollment instruction for the
// recognizer. Immutable once built.
class SpeakerTriplet {
 public:
  SpeakerTriplet(std::string speaker, Seconds start, Seconds end,
                 std::vector<float> embedding);

  const std::string& speaker() const { return speaker_; }
  Seconds start() const { return start_; }
  Seconds end() const { return end_; }
  std::span<const float> embedding() const { return embedding_; }
  std::size_t dim() const { return embedding_.size(); }

  // Same speaker and embedding, new interval (validated).
  SpeakerTriplet with_interval(Seconds start, Seconds end) const;

  friend bool operator==(const SpeakerTriplet&, const SpeakerTriplet&) = default;

 private:
  std::string speaker_;
  Seconds start_;
  Seconds end_;
  std::vector<float> embedding_;
};

struct TimedWord {
  std::string token;
  Seconds start = 0.0;
  Seconds end = 0.0;
  std::string speaker;

  friend bool operator==(const TimedWord&, const TimedWord&) = default;
};

TimedWord make_timed_word(std::string token, Seconds start, Seconds end,
                          std::string speaker);

// One conversation: audio reference plus optional reference/hypothesis
// transcripts. Paths come from the manifest and are already resolved.
class Session {
 public:
  Session(std::string session_id, std::string audio, LanguageId language);

  const std::string& session_id() const { return session_id_; }
  const std::string& audio() const { return audio_; }
  const LanguageId& language() const { return language_; }

  const std::optional<std::string>& reference_path() const { return reference_path_; }
  const std::optional<std::string>& rttm_path() const { return rttm_path_; }
  void set_reference_path(std::string p) { reference_path_ = std::move(p); }
  void set_rttm_path(std::string p) { rttm_path_ = std::move(p); }

  const std::optional<std::vector<Segment>>& reference() const { return reference_; }
  const std::optional<std::vector<Segment>>& hypothesis() const { return hypothesis_; }
  // Both setters reject segments belonging to another session.
  void set_reference(std::vector<Segment> segs);
  void set_hypothesis(std::vector<Segment> segs);

 private:
  std::string session_id_;
  std::string audio_;
  LanguageId language_;
  std::optional<std::string> reference_path_;
  std::optional<std::string> rttm_path_;
  std::optional<std::vector<Segment>> reference_;
  std::optional<std::vector<Segment>> hypothesis_;
};

// Splits on runs of Unicode whitespace (UTF-8 input). No other normalization.
std::vector<std::string> tokenize(std::string_view text);

// Word splitter hook for scripts without spaces; tokenize() is the default.
using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

}  // namespace mlcslm
