#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mlcslm/assignment.hpp"
#include "mlcslm/diarization_metrics.hpp"
#include "mlcslm/error.hpp"

namespace mlcslm {

namespace {

struct Labels {
  std::vector<std::string> names;
  std::vector<std::size_t> of_segment;  // segment index -> label index
};

Labels index_speakers(std::span<const Segment> segs) {
  std::map<std::string, std::size_t> ids;
  for (const auto& s : segs) ids.emplace(s.speaker, 0);
  Labels out;
  for (auto& [name, id] : ids) {
    id = out.names.size();
    out.names.push_back(name);
  }
  for (const auto& s : segs) out.of_segment.push_back(ids.at(s.speaker));
  return out;
}

// activity[k][i] != 0 iff speaker k is active on elementary interval i.
std::vector<std::vector<int>> activity(std::span<const Segment> segs,
                                       const Labels& labels,
                                       const std::vector<Seconds>& points) {
  const std::size_t n_int = points.size() - 1;
  std::vector<std::vector<int>> act(labels.names.size(), std::vector<int>(n_int + 1, 0));
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const auto lo = std::lower_bound(points.begin(), points.end(), segs[s].start) - points.begin();
    const auto hi = std::lower_bound(points.begin(), points.end(), segs[s].end) - points.begin();
    auto& row = act[labels.of_segment[s]];
    row[static_cast<std::size_t>(lo)] += 1;
    row[static_cast<std::size_t>(hi)] -= 1;
  }
  for (auto& row : act) {
    int run = 0;
    for (std::size_t i = 0; i < n_int; ++i) {
      run += row[i];
      row[i] = run > 0 ? 1 : 0;
    }
    row.resize(n_int);
  }
  return act;
}

void check_one_session(std::span<const Segment> ref, std::span<const Segment> hyp) {
  const std::string* id = nullptr;
  for (auto segs : {ref, hyp})
    for (const auto& s : segs) {
      if (auto v = validate_segment(s)) throw Error("invalid segment: " + *v);
      if (!id) id = &s.session_id;
      else if (*id != s.session_id)
        throw Error("segments from sessions '" + *id + "' and '" + s.session_id +
                    "' passed to single-session DER");
    }
}

}  // namespace

double DerBreakdown::der() const {
  if (total_ref <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (missed + false_alarm + confusion) / total_ref;
}

DerBreakdown& DerBreakdown::operator+=(const DerBreakdown& o) {
  missed += o.missed;
  false_alarm += o.false_alarm;
  confusion += o.confusion;
  total_ref += o.total_ref;
  return *this;
}

DerResult der_components(std::span<const Segment> ref, std::span<const Segment> hyp,
                         Seconds collar) {
  if (!(collar >= 0.0) || std::isinf(collar)) throw Error("collar must be finite and >= 0");
  check_one_session(ref, hyp);

  // No-score zones around every reference boundary, merged.
  std::vector<std::pair<Seconds, Seconds>> zones;
  if (collar > 0.0) {
    for (const auto& s : ref)
      for (Seconds b : {s.start, s.end}) zones.emplace_back(b - collar / 2, b + collar / 2);
    std::sort(zones.begin(), zones.end());
    std::vector<std::pair<Seconds, Seconds>> merged;
    for (const auto& z : zones) {
      if (!merged.empty() && z.first <= merged.back().second)
        merged.back().second = std::max(merged.back().second, z.second);
      else
        merged.push_back(z);
    }
    zones = std::move(merged);
  }

  std::vector<Seconds> points;
  for (auto segs : {ref, hyp})
    for (const auto& s : segs) {
      points.push_back(s.start);
      points.push_back(s.end);
    }
  for (const auto& z : zones) {
    points.push_back(z.first);
    points.push_back(z.second);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  DerResult result;
  if (points.size() < 2) return result;

  const Labels ref_labels = index_speakers(ref);
  const Labels hyp_labels = index_speakers(hyp);
  const auto ref_act = activity(ref, ref_labels, points);
  const auto hyp_act = activity(hyp, hyp_labels, points);
  const std::size_t n_ref = ref_labels.names.size(), n_hyp = hyp_labels.names.size();
  const std::size_t n_int = points.size() - 1;

  std::vector<char> scored(n_int, 1);
  for (std::size_t i = 0; i < n_int; ++i) {
    const Seconds mid = 0.5 * (points[i] + points[i + 1]);
    auto it = std::upper_bound(zones.begin(), zones.end(), mid,
                               [](Seconds t, const auto& z) { return t < z.first; });
    if (it != zones.begin() && mid < std::prev(it)->second) scored[i] = 0;
  }

  Matrix<double> overlap(n_ref, n_hyp, 0.0);
  for (std::size_t r = 0; r < n_ref; ++r)
    for (std::size_t h = 0; h < n_hyp; ++h) {
      double t = 0.0;
      for (std::size_t i = 0; i < n_int; ++i)
        if (scored[i] && ref_act[r][i] && hyp_act[h][i]) t += points[i + 1] - points[i];
      overlap(r, h) = t;
    }

  Matrix<double> cost(n_ref, n_hyp);
  for (std::size_t r = 0; r < n_ref; ++r)
    for (std::size_t h = 0; h < n_hyp; ++h) cost(r, h) = -overlap(r, h);
  const auto ref_to_hyp = solve_assignment(cost);
  for (std::size_t r = 0; r < n_ref; ++r)
    if (ref_to_hyp[r] != kUnassigned)
      result.mapping.emplace(ref_labels.names[r],
                             hyp_labels.names[static_cast<std::size_t>(ref_to_hyp[r])]);

  DerBreakdown& b = result.breakdown;
  for (std::size_t i = 0; i < n_int; ++i) {
    if (!scored[i]) continue;
    const double d = points[i + 1] - points[i];
    std::size_t nr = 0, nh = 0, correct = 0;
    for (std::size_t r = 0; r < n_ref; ++r) {
      if (!ref_act[r][i]) continue;
      ++nr;
      if (ref_to_hyp[r] != kUnassigned && hyp_act[static_cast<std::size_t>(ref_to_hyp[r])][i])
        ++correct;
    }
    for (std::size_t h = 0; h < n_hyp; ++h) nh += hyp_act[h][i] ? 1 : 0;
    b.total_ref += d * static_cast<double>(nr);
    if (nr > nh) b.missed += d * static_cast<double>(nr - nh);
    if (nh > nr) b.false_alarm += d * static_cast<double>(nh - nr);
    b.confusion += d * static_cast<double>(std::min(nr, nh) - correct);
  }
  return result;
}

DerBreakdown compute_der(std::span<const Segment> ref, std::span<const Segment> hyp,
                         Seconds collar) {
  DerBreakdown b = der_components(ref, hyp, collar).breakdown;
  if (!(b.total_ref > 0.0)) throw Error("DER undefined: no scored reference speech");
  return b;
}

DerBreakdown compute_der_corpus(std::span<const Segment> ref,
                                std::span<const Segment> hyp, Seconds collar) {
  std::map<std::string, std::pair<std::vector<Segment>, std::vector<Segment>>> by_session;
  for (const auto& s : ref) by_session[s.session_id].first.push_back(s);
  for (const auto& s : hyp) by_session[s.session_id].second.push_back(s);
  DerBreakdown total;
  for (const auto& [id, pair] : by_session)
    total += der_components(pair.first, pair.second, collar).breakdown;
  if (!(total.total_ref > 0.0)) throw Error("DER undefined: no scored reference speech");
  return total;
}

}  // namespace mlcslm
