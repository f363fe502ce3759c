#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>

#include "mlcslm/assignment.hpp"

using mlcslm::kUnassigned;
using mlcslm::Matrix;

namespace {

// Minimum over all injective maps of the smaller side into the larger.
long brute_force_min(const Matrix<long>& c) {
  const bool flip = c.rows() > c.cols();
  const Matrix<long> m = flip ? c.transposed() : c;
  std::vector<std::size_t> cols(m.cols());
  std::iota(cols.begin(), cols.end(), 0);
  long best = std::numeric_limits<long>::max();
  do {
    long t = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) t += m(r, cols[r]);
    best = std::min(best, t);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

}  // namespace

TEST_CASE("solve_assignment matches brute force on random matrices") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t r = 1 + rng() % 5, c = 1 + rng() % 5;
    Matrix<long> m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = long(rng() % 21) - 10;
    const auto a = mlcslm::solve_assignment(m);
    REQUIRE(a.size() == r);
    long total = 0;
    std::vector<char> used(c, 0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < r; ++i) {
      if (a[i] == kUnassigned) continue;
      const auto j = std::size_t(a[i]);
      CHECK_FALSE(used[j]);
      used[j] = 1;
      total += m(i, j);
      ++assigned;
    }
    CHECK(assigned == std::min(r, c));
    CHECK(total == brute_force_min(m));
  }
}

TEST_CASE("solve_assignment on degenerate shapes") {
  CHECK(mlcslm::solve_assignment(Matrix<long>(0, 0)).empty());
  CHECK(mlcslm::solve_assignment(Matrix<long>(0, 3)).empty());
  const auto a = mlcslm::solve_assignment(Matrix<long>(2, 0));
  CHECK(a == std::vector<std::ptrdiff_t>{kUnassigned, kUnassigned});
}
