#pragma once

// Readers and writers for the on-disk formats: RTTM (diarization), SegLST
// JSON (transcripts), the EMB1 embedding archive, session manifests and
// verification trial lists. All parsers throw mlcslm::FormatError.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mlcslm/types.hpp"

namespace mlcslm {

// RTTM: `SPEAKER <session> <chan> <onset> <dur> <NA> <NA> <speaker> ...`.
// Comment lines start with ";;"; non-SPEAKER records are skipped.
std::vector<Segment> parse_rttm(std::string_view text);
std::vector<Segment> parse_rttm(std::istream& in);
// Times rendered with 3 decimals; the duration is derived from the rounded
// end so that both endpoints survive a round trip to within half a millisecond.
std::string write_rttm(std::span<const Segment> segments);

// SegLST: JSON array of {session_id, speaker, start_time, end_time, words
// [, language]}.
std::vector<Segment> parse_seglst(std::string_view text);
std::string write_seglst(std::span<const Segment> segments);

// Fixed-dimension float vectors keyed by string, insertion ordered.
class EmbeddingArchive {
 public:
  explicit EmbeddingArchive(std::uint32_t dim);

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Throws on a dimension mismatch or a duplicate key.
  void add(std::string key, std::vector<float> vec);
  const std::vector<float>* find(const std::string& key) const;

  struct Entry {
    std::string key;
    std::vector<float> vec;
  };
  std::span<const Entry> entries() const { return entries_; }

  friend bool operator==(const EmbeddingArchive& a, const EmbeddingArchive& b);

 private:
  std::uint32_t dim_;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary layout (little endian): "EMB1", u32 dim, u32 count, then count
// records of [u32 key length, key bytes, dim x f32].
EmbeddingArchive read_embeddings(std::string_view bytes);
std::string write_embeddings(const EmbeddingArchive& archive);

// Manifest: JSON array of {session_id, audio, language [, reference, rttm]}.
// Relative paths resolve against `base_dir`.
std::vector<Session> parse_manifest(std::string_view text,
                                    const std::filesystem::path& base_dir);

struct Trial {
  bool target = false;
  double score = 0.0;

  friend bool operator==(const Trial&, const Trial&) = default;
};

// One `target|nontarget <score>` pair per line.
std::vector<Trial> parse_trials(std::string_view text);

// File helpers. read_file throws mlcslm::Error when the file cannot be read.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
std::vector<Session> load_manifest(const std::filesystem::path& path);

}  // namespace mlcslm
