#pragma once

#include <map>
#include <span>
#include <string>

#include "mlcslm/io.hpp"
#include "mlcslm/types.hpp"

namespace mlcslm {

inline constexpr Seconds kDefaultDerCollar = 0.25;

// Time components of the diarization error. Overlapped speech counts once
// per active speaker.
struct DerBreakdown {
  Seconds missed = 0.0;
  Seconds false_alarm = 0.0;
  Seconds confusion = 0.0;
  Seconds total_ref = 0.0;

  // (missed + false_alarm + confusion) / total_ref; NaN when total_ref is 0.
  double der() const;

  DerBreakdown& operator+=(const DerBreakdown& o);
};

struct DerResult {
  DerBreakdown breakdown;
  // Optimal one-to-one map from reference to hypothesis speaker labels.
  std::map<std::string, std::string> mapping;
};

// Single-session scoring without the total_ref > 0 check. Regions within
// collar/2 of any reference boundary are not scored. Throws mlcslm::Error if
// the segments span more than one session or collar < 0.
DerResult der_components(std::span<const Segment> ref, std::span<const Segment> hyp,
                         Seconds collar);

// As der_components, but an empty scored reference is an error.
DerBreakdown compute_der(std::span<const Segment> ref, std::span<const Segment> hyp,
                         Seconds collar = kDefaultDerCollar);

// Groups by session, scores each and sums the time components.
DerBreakdown compute_der_corpus(std::span<const Segment> ref,
                                std::span<const Segment> hyp,
                                Seconds collar = kDefaultDerCollar);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Equal error rate by a threshold sweep over the distinct scores, with
// linear interpolation of the FAR - FRR sign change.
EerResult compute_eer(std::span<const Trial> trials);

}  // namespace mlcslm
