#include <algorithm>

#include "mlcslm/diarization_metrics.hpp"
#include "mlcslm/error.hpp"

namespace mlcslm {

EerResult compute_eer(std::span<const Trial> trials) {
  std::vector<double> tgt, non;
  for (const auto& t : trials) (t.target ? tgt : non).push_back(t.score);
  if (tgt.empty() || non.empty())
    throw Error("EER needs at least one target and one nontarget trial");
  std::sort(tgt.begin(), tgt.end());
  std::sort(non.begin(), non.end());

  std::vector<double> thresholds;
  thresholds.reserve(tgt.size() + non.size());
  std::merge(tgt.begin(), tgt.end(), non.begin(), non.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double nt = static_cast<double>(tgt.size()), nn = static_cast<double>(non.size());
  // FAR(t) = #non >= t / nn, FRR(t) = #tgt < t / nt.
  auto rates = [&](double t) {
    const auto non_ge = non.end() - std::lower_bound(non.begin(), non.end(), t);
    const auto tgt_lt = std::lower_bound(tgt.begin(), tgt.end(), t) - tgt.begin();
    return std::pair{static_cast<double>(non_ge) / nn, static_cast<double>(tgt_lt) / nt};
  };

  // Past the top score every trial is rejected: FAR 0, FRR 1.
  std::vector<std::pair<double, std::pair<double, double>>> sweep;
  for (double t : thresholds) sweep.emplace_back(t, rates(t));
  sweep.emplace_back(thresholds.back(), std::pair{0.0, 1.0});

  auto diff = [](const auto& p) { return p.second.first - p.second.second; };
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const double dk = diff(sweep[k]);
    if (dk > 0.0) continue;
    if (dk == 0.0 || k == 0) return {sweep[k].second.first, sweep[k].first};
    const double dp = diff(sweep[k - 1]);
    const double lambda = dp / (dp - dk);
    const double far0 = sweep[k - 1].second.first, far1 = sweep[k].second.first;
    return {far0 + lambda * (far1 - far0),
            sweep[k - 1].first + lambda * (sweep[k].first - sweep[k - 1].first)};
  }
  return {sweep.back().second.first, sweep.back().first};  // unreachable
}

}  // namespace mlcslm
