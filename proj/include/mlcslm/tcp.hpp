#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mlcslm/assignment.hpp"
#include "mlcslm/report.hpp"
#include "mlcslm/types.hpp"

namespace mlcslm {

inline constexpr Seconds kDefaultTcpCollar = 5.0;
inline constexpr Seconds kInfiniteCollar = std::numeric_limits<double>::infinity();

struct TcpConfig {
  Seconds collar = kDefaultTcpCollar;  // may be kInfiniteCollar (cpWER)
  Tokenizer tokenizer = tokenize;
};

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t distance() const { return substitutions + deletions + insertions; }
  EditCounts& operator+=(const EditCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    return *this;
  }
  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

struct TcpResult {
  EditCounts counts;
  std::size_t ref_words = 0;
  // hyp speaker -> ref speaker, injective; unmatched speakers are absent.
  std::map<std::string, std::string> assignment;

  double tcpwer() const {
    return static_cast<double>(counts.distance()) / static_cast<double>(ref_words);
  }
};

// Equal subdivision of the segment interval among its words.
std::vector<TimedWord> pseudo_word_times(const Segment& segment,
                                         const Tokenizer& tokenizer = tokenize);

// Levenshtein alignment where a word pair may only be aligned (matched or
// substituted) when [ref.start, ref.end] meets [hyp.start - collar,
// hyp.end + collar]. Among minimum-distance alignments, fewer
// substitutions and then fewer deletions win. Both inputs must be sorted
// by start time.
EditCounts tc_levenshtein(std::span<const TimedWord> ref, std::span<const TimedWord> hyp,
                          Seconds collar);

// One time-ordered word stream per speaker label (labels sorted).
struct SpeakerStream {
  std::string speaker;
  std::vector<TimedWord> words;
};
std::vector<SpeakerStream> speaker_streams(std::span<const Segment> segments,
                                           const Tokenizer& tokenizer = tokenize);

// Time-constrained permutation WER for one session.
TcpResult tcp_wer_session(std::span<const Segment> ref, std::span<const Segment> hyp,
                          const TcpConfig& cfg = {});

struct SessionScore {
  std::string session_id;
  LanguageId language;
  TcpResult result;
};

// Micro-averaged language rows (sums of counts, then divide). The overall
// row is micro over all sessions, or in macro mode the unweighted mean of
// the language rates (its counts are still the sums).
ScoreReport aggregate(std::vector<SessionScore> results,
                      AverageMode mode = AverageMode::kMicro);

// Scoring kernels. The default versions parallelise with OpenMP; the
// serial:: versions are the single-threaded reference they are tested
// against and must produce identical results.

// C(i, j) = tc_levenshtein(ref[i], hyp[j]).
Matrix<EditCounts> pair_cost_matrix(std::span<const SpeakerStream> ref,
                                    std::span<const SpeakerStream> hyp, Seconds collar);

struct SessionInput {
  std::string session_id;
  LanguageId language;
  std::vector<Segment> ref;
  std::vector<Segment> hyp;
};

// Scores every session; results in input order. Sessions that cannot be
// scored (no reference words) throw mlcslm::Error.
std::vector<SessionScore> score_sessions(std::span<const SessionInput> sessions,
                                         const TcpConfig& cfg = {});

namespace serial {
Matrix<EditCounts> pair_cost_matrix(std::span<const SpeakerStream> ref,
                                    std::span<const SpeakerStream> hyp, Seconds collar);
std::vector<SessionScore> score_sessions(std::span<const SessionInput> sessions,
                                         const TcpConfig& cfg = {});
}  // namespace serial

// Speaker assignment over a precomputed pair-cost matrix. Exposed so that
// both kernel flavours share it.
TcpResult assign_speakers(std::span<const SpeakerStream> ref,
                          std::span<const SpeakerStream> hyp,
                          const Matrix<EditCounts>& pair_cost);

}  // namespace mlcslm
