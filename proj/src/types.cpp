#include "mlcslm/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mlcslm/error.hpp"

namespace mlcslm {

namespace {

constexpr std::array<std::string_view, 15> kKnownLanguages = {
    "English-American", "English-Australian", "English-British",
    "English-Filipino", "English-Indian",     "French",
    "German",           "Italian",            "Japanese",
    "Korean",           "Portuguese",         "Russian",
    "Spanish",          "Thai",               "Vietnamese",
};

bool is_unicode_space(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Decodes one code point at text[i]; malformed bytes decode as themselves
// (never whitespace) and advance by one.
char32_t decode_utf8(std::string_view text, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  len = 1;
  if (b0 < 0x80) return b0;
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) { extra = 1; cp = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { extra = 2; cp = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { extra = 3; cp = b0 & 0x07; }
  else return 0xFFFD;
  if (i + extra >= text.size()) return 0xFFFD;
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(text[i + k]);
    if ((b & 0xC0) != 0x80) return 0xFFFD;
    cp = (cp << 6) | (b & 0x3F);
  }
  len = 1 + extra;
  return cp;
}

void check_interval(Seconds start, Seconds end, bool strict) {
  if (!std::isfinite(start) || !std::isfinite(end))
    throw Error("non-finite time");
  if (start < 0.0) throw Error("negative start time");
  if (strict ? !(end > start) : !(end >= start))
    throw Error("non-positive duration");
}

}  // namespace

LanguageId::LanguageId(std::string code) : code_(std::move(code)) {
  if (code_.empty()) throw Error("empty language id");
}

bool LanguageId::is_known() const {
  return std::find(kKnownLanguages.begin(), kKnownLanguages.end(), code_) !=
         kKnownLanguages.end();
}

bool LanguageId::is_english_variant() const {
  return code_.starts_with("English");
}

std::span<const std::string_view> known_languages() { return kKnownLanguages; }

std::optional<std::string> validate_segment(const Segment& s) {
  if (!std::isfinite(s.start) || !std::isfinite(s.end)) return "non-finite time";
  if (s.start < 0.0) return "negative start time";
  if (!(s.end > s.start)) return "non-positive duration";
  return std::nullopt;
}

Segment make_segment(std::string session_id, std::string speaker, Seconds start,
                     Seconds end, std::optional<std::string> text,
                     std::optional<LanguageId> language) {
  Segment s{std::move(session_id), std::move(speaker), start, end,
            std::move(text), std::move(language)};
  if (auto v = validate_segment(s)) throw Error(*v);
  return s;
}

SpeakerTriplet::SpeakerTriplet(std::string speaker, Seconds start, Seconds end,
                               std::vector<float> embedding)
    : speaker_(std::move(speaker)), start_(start), end_(end),
      embedding_(std::move(embedding)) {
  check_interval(start_, end_, /*strict=*/true);
  if (embedding_.empty()) throw Error("empty embedding");
  for (float v : embedding_)
    if (!std::isfinite(v)) throw Error("non-finite embedding component");
}

SpeakerTriplet SpeakerTriplet::with_interval(Seconds start, Seconds end) const {
  return SpeakerTriplet(speaker_, start, end, embedding_);
}

TimedWord make_timed_word(std::string token, Seconds start, Seconds end,
                          std::string speaker) {
  if (token.empty()) throw Error("empty token");
  if (tokenize(token).size() != 1) throw Error("token contains whitespace");
  check_interval(start, end, /*strict=*/false);
  return TimedWord{std::move(token), start, end, std::move(speaker)};
}

Session::Session(std::string session_id, std::string audio, LanguageId language)
    : session_id_(std::move(session_id)), audio_(std::move(audio)),
      language_(std::move(language)) {
  if (session_id_.empty()) throw Error("empty session id");
}

void Session::set_reference(std::vector<Segment> segs) {
  for (const auto& s : segs)
    if (s.session_id != session_id_)
      throw Error("segment of session '" + s.session_id +
                  "' attached to session '" + session_id_ + "'");
  reference_ = std::move(segs);
}

void Session::set_hypothesis(std::vector<Segment> segs) {
  for (const auto& s : segs)
    if (s.session_id != session_id_)
      throw Error("segment of session '" + s.session_id +
                  "' attached to session '" + session_id_ + "'");
  hypothesis_ = std::move(segs);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0, word_begin = 0;
  bool in_word = false;
  while (i < text.size()) {
    std::size_t len = 1;
    const char32_t cp = decode_utf8(text, i, len);
    if (is_unicode_space(cp)) {
      if (in_word) out.emplace_back(text.substr(word_begin, i - word_begin));
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      word_begin = i;
    }
    i += len;
  }
  if (in_word) out.emplace_back(text.substr(word_begin));
  return out;
}

}  // namespace mlcslm
