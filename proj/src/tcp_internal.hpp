#pragma once

#include <span>

#include "mlcslm/error.hpp"
#include "mlcslm/tcp.hpp"

namespace mlcslm::detail {

inline void check_session_input(std::span<const Segment> ref, std::span<const Segment> hyp) {
  const std::string* id = nullptr;
  for (auto segs : {ref, hyp})
    for (const auto& s : segs) {
      if (auto v = validate_segment(s)) throw Error("invalid segment: " + *v);
      if (!s.text) throw Error("segment without text in tcpWER input");
      if (!id) id = &s.session_id;
      else if (*id != s.session_id)
        throw Error("segments from sessions '" + *id + "' and '" + s.session_id +
                    "' passed to single-session tcpWER");
    }
}

template <typename CostFn>
TcpResult score_one(std::span<const Segment> ref, std::span<const Segment> hyp,
                    const TcpConfig& cfg, CostFn&& cost_fn) {
  if (!(cfg.collar >= 0.0)) throw Error("collar must be >= 0");
  check_session_input(ref, hyp);
  const auto ref_streams = speaker_streams(ref, cfg.tokenizer);
  const auto hyp_streams = speaker_streams(hyp, cfg.tokenizer);
  TcpResult r = assign_speakers(ref_streams, hyp_streams,
                                cost_fn(ref_streams, hyp_streams, cfg.collar));
  if (r.ref_words == 0) throw Error("tcpWER undefined: reference has no words");
  return r;
}

}  // namespace mlcslm::detail
