#include <exception>
#include <optional>

#include "mlcslm/tcp.hpp"
#include "tcp_internal.hpp"

namespace mlcslm {

namespace {

// Rethrows the first (lowest-index) exception captured inside a parallel loop.
void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

Matrix<EditCounts> pair_cost_matrix(std::span<const SpeakerStream> ref,
                                    std::span<const SpeakerStream> hyp, Seconds collar) {
  const std::size_t nr = ref.size(), nh = hyp.size();
  const auto pairs = static_cast<std::ptrdiff_t>(nr * nh);
  Matrix<EditCounts> c(nr, nh);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(pairs));
#pragma omp parallel for schedule(dynamic) if (pairs > 1)
  for (std::ptrdiff_t k = 0; k < pairs; ++k) {
    const auto i = static_cast<std::size_t>(k) / nh, j = static_cast<std::size_t>(k) % nh;
    try {
      c(i, j) = tc_levenshtein(ref[i].words, hyp[j].words, collar);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return c;
}

std::vector<SessionScore> score_sessions(std::span<const SessionInput> sessions,
                                         const TcpConfig& cfg) {
  const auto n = static_cast<std::ptrdiff_t>(sessions.size());
  std::vector<std::optional<TcpResult>> results(sessions.size());
  std::vector<std::exception_ptr> errors(sessions.size());
  // One session per task; the per-session pair matrix stays serial.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto& s = sessions[static_cast<std::size_t>(k)];
    try {
      results[static_cast<std::size_t>(k)] =
          detail::score_one(s.ref, s.hyp, cfg, [](auto rs, auto hs, Seconds c) {
            return serial::pair_cost_matrix(rs, hs, c);
          });
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  rethrow_first(errors);
  std::vector<SessionScore> out;
  out.reserve(sessions.size());
  for (std::size_t k = 0; k < sessions.size(); ++k)
    out.push_back(SessionScore{sessions[k].session_id, sessions[k].language,
                               std::move(*results[k])});
  return out;
}

}  // namespace mlcslm
