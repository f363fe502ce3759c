#include <algorithm>
#include <cmath>
#include <tuple>

#include "mlcslm/error.hpp"
#include "mlcslm/tcp.hpp"
#include "tcp_internal.hpp"

namespace mlcslm {

namespace {

struct Cell {
  std::uint32_t cost = 0;
  std::uint32_t subs = 0;
  std::uint32_t dels = 0;

  Cell plus(std::uint32_t c, std::uint32_t s, std::uint32_t d) const {
    return {cost + c, subs + s, dels + d};
  }
  bool operator<(const Cell& o) const {
    return std::tie(cost, subs, dels) < std::tie(o.cost, o.subs, o.dels);
  }
};

bool admissible(const TimedWord& r, const TimedWord& h, Seconds collar) {
  return r.start <= h.end + collar && h.start - collar <= r.end;
}

bool sorted_by_start(std::span<const TimedWord> words) {
  return std::is_sorted(words.begin(), words.end(),
                        [](const TimedWord& a, const TimedWord& b) { return a.start < b.start; });
}

}  // namespace

std::vector<TimedWord> pseudo_word_times(const Segment& segment, const Tokenizer& tokenizer) {
  if (!segment.text) throw Error("segment has no text");
  const auto tokens = tokenizer(*segment.text);
  std::vector<TimedWord> out;
  out.reserve(tokens.size());
  const double n = static_cast<double>(tokens.size());
  const Seconds span = segment.end - segment.start;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Seconds b = segment.start + static_cast<double>(i) * span / n;
    const Seconds e = segment.start + static_cast<double>(i + 1) * span / n;
    out.push_back(TimedWord{tokens[i], b, e, segment.speaker});
  }
  return out;
}

EditCounts tc_levenshtein(std::span<const TimedWord> ref, std::span<const TimedWord> hyp,
                          Seconds collar) {
  if (!(collar >= 0.0)) throw Error("collar must be >= 0");
  if (!sorted_by_start(ref)) throw Error("reference words not sorted by start time");
  if (!sorted_by_start(hyp)) throw Error("hypothesis words not sorted by start time");

  const std::size_t m = ref.size(), n = hyp.size();
  std::vector<Cell> prev(n + 1), cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) prev[j] = {static_cast<std::uint32_t>(j), 0, 0};
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = {static_cast<std::uint32_t>(i), 0, static_cast<std::uint32_t>(i)};
    const TimedWord& r = ref[i - 1];
    for (std::size_t j = 1; j <= n; ++j) {
      Cell best = prev[j].plus(1, 0, 1);  // deletion
      best = std::min(best, cur[j - 1].plus(1, 0, 0));  // insertion
      if (admissible(r, hyp[j - 1], collar)) {
        const std::uint32_t sub = r.token == hyp[j - 1].token ? 0 : 1;
        best = std::min(best, prev[j - 1].plus(sub, sub, 0));
      }
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell& c = prev[n];
  return EditCounts{c.subs, c.dels, c.cost - c.subs - c.dels};
}

std::vector<SpeakerStream> speaker_streams(std::span<const Segment> segments,
                                           const Tokenizer& tokenizer) {
  std::map<std::string, std::vector<const Segment*>> by_speaker;
  for (const auto& s : segments) by_speaker[s.speaker].push_back(&s);
  std::vector<SpeakerStream> out;
  out.reserve(by_speaker.size());
  for (auto& [speaker, segs] : by_speaker) {
    std::stable_sort(segs.begin(), segs.end(), [](const Segment* a, const Segment* b) {
      return std::tie(a->start, a->end) < std::tie(b->start, b->end);
    });
    SpeakerStream stream{speaker, {}};
    for (const Segment* s : segs) {
      auto words = pseudo_word_times(*s, tokenizer);
      stream.words.insert(stream.words.end(), std::make_move_iterator(words.begin()),
                          std::make_move_iterator(words.end()));
    }
    // Overlapping segments of one speaker interleave their words.
    std::stable_sort(stream.words.begin(), stream.words.end(),
                     [](const TimedWord& a, const TimedWord& b) { return a.start < b.start; });
    out.push_back(std::move(stream));
  }
  return out;
}

TcpResult assign_speakers(std::span<const SpeakerStream> ref,
                          std::span<const SpeakerStream> hyp,
                          const Matrix<EditCounts>& pair_cost) {
  const std::size_t nr = ref.size(), nh = hyp.size();
  std::size_t total_words = 0;
  for (const auto& s : ref) total_words += s.words.size();
  for (const auto& s : hyp) total_words += s.words.size();

  // Costs are ordered lexicographically by (distance, subs, dels) through
  // a positional encoding, so every optimal assignment yields the same
  // S/D/I split. Very large sessions fall back to distance only.
  const std::int64_t base = static_cast<std::int64_t>(total_words) + 1;
  const bool lexicographic = base <= 100000;
  auto key = [&](const EditCounts& c) -> std::int64_t {
    const auto d = static_cast<std::int64_t>(c.distance());
    if (!lexicographic) return d;
    return (d * base + static_cast<std::int64_t>(c.substitutions)) * base +
           static_cast<std::int64_t>(c.deletions);
  };
  auto deletion_of = [](const SpeakerStream& s) { return EditCounts{0, s.words.size(), 0}; };
  auto insertion_of = [](const SpeakerStream& s) { return EditCounts{0, 0, s.words.size()}; };

  // Rows: ref speakers then nh dummies; columns: hyp speakers then nr dummies.
  const std::size_t size = nr + nh;
  Matrix<std::int64_t> cost(size, size, 0);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nh; ++j) cost(i, j) = key(pair_cost(i, j));
    for (std::size_t j = nh; j < size; ++j) cost(i, j) = key(deletion_of(ref[i]));
  }
  for (std::size_t i = nr; i < size; ++i)
    for (std::size_t j = 0; j < nh; ++j) cost(i, j) = key(insertion_of(hyp[j]));

  const auto row_to_col = solve_assignment(cost);
  TcpResult result;
  for (const auto& s : ref) result.ref_words += s.words.size();
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = static_cast<std::size_t>(row_to_col[i]);
    if (i < nr && j < nh) {
      result.counts += pair_cost(i, j);
      result.assignment.emplace(hyp[j].speaker, ref[i].speaker);
    } else if (i < nr) {
      result.counts += deletion_of(ref[i]);
    } else if (j < nh) {
      result.counts += insertion_of(hyp[j]);
    }
  }
  return result;
}


TcpResult tcp_wer_session(std::span<const Segment> ref, std::span<const Segment> hyp,
                          const TcpConfig& cfg) {
  return detail::score_one(ref, hyp, cfg,
                   [](auto r, auto h, Seconds c) { return pair_cost_matrix(r, h, c); });
}

namespace serial {

Matrix<EditCounts> pair_cost_matrix(std::span<const SpeakerStream> ref,
                                    std::span<const SpeakerStream> hyp, Seconds collar) {
  Matrix<EditCounts> c(ref.size(), hyp.size());
  for (std::size_t i = 0; i < ref.size(); ++i)
    for (std::size_t j = 0; j < hyp.size(); ++j)
      c(i, j) = tc_levenshtein(ref[i].words, hyp[j].words, collar);
  return c;
}

std::vector<SessionScore> score_sessions(std::span<const SessionInput> sessions,
                                         const TcpConfig& cfg) {
  std::vector<SessionScore> out;
  out.reserve(sessions.size());
  for (const auto& s : sessions) {
    TcpResult r = detail::score_one(s.ref, s.hyp, cfg, [](auto rs, auto hs, Seconds c) {
      return serial::pair_cost_matrix(rs, hs, c);
    });
    out.push_back(SessionScore{s.session_id, s.language, std::move(r)});
  }
  return out;
}

}  // namespace serial

ScoreReport aggregate(std::vector<SessionScore> results, AverageMode mode) {
  std::sort(results.begin(), results.end(), [](const SessionScore& a, const SessionScore& b) {
    return std::tie(a.language, a.session_id) < std::tie(b.language, b.session_id);
  });
  ScoreReport report;
  report.mode = mode;
  auto add = [](ReportRow& row, const TcpResult& r) {
    row.substitutions += r.counts.substitutions;
    row.deletions += r.counts.deletions;
    row.insertions += r.counts.insertions;
    row.ref_words += r.ref_words;
    row.sessions += 1;
  };
  auto rate = [](const ReportRow& row) -> std::optional<double> {
    if (row.ref_words == 0) return std::nullopt;
    return static_cast<double>(row.errors()) / static_cast<double>(row.ref_words);
  };
  for (const auto& s : results) {
    if (report.rows.empty() || report.rows.back().language != s.language.str())
      report.rows.push_back(ReportRow{s.language.str(), 0, 0, 0, 0, 0, std::nullopt});
    add(report.rows.back(), s.result);
    add(report.overall, s.result);
  }
  for (auto& row : report.rows) row.tcpwer = rate(row);
  if (mode == AverageMode::kMicro) {
    report.overall.tcpwer = rate(report.overall);
  } else {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : report.rows)
      if (row.tcpwer) {
        sum += *row.tcpwer;
        ++n;
      }
    if (n > 0) report.overall.tcpwer = sum / static_cast<double>(n);
  }
  return report;
}

}  // namespace mlcslm
