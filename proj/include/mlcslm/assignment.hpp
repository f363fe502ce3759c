#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "mlcslm/error.hpp"

namespace mlcslm {

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

inline constexpr std::ptrdiff_t kUnassigned = -1;

// Minimum-cost assignment (Hungarian method with row/column potentials,
// O(n^2 m)). Returns, for every row, the column it is matched to; when
// there are more rows than columns the surplus rows get kUnassigned.
// Works for integral T exactly; for floating T up to rounding in the
// potentials.
template <typename T>
std::vector<std::ptrdiff_t> solve_assignment(const Matrix<T>& cost) {
  if (cost.rows() > cost.cols()) {
    const auto col_to_row = solve_assignment(cost.transposed());
    std::vector<std::ptrdiff_t> row_to_col(cost.rows(), kUnassigned);
    for (std::size_t c = 0; c < col_to_row.size(); ++c)
      row_to_col[static_cast<std::size_t>(col_to_row[c])] = static_cast<std::ptrdiff_t>(c);
    return row_to_col;
  }
  const std::size_t n = cost.rows(), m = cost.cols();
  if (n == 0) return {};
  const T inf = std::numeric_limits<T>::max();

  // 1-based with a virtual column 0, as in the classic formulation.
  std::vector<T> u(n + 1, T{}), v(m + 1, T{});
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<T> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      T delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const T cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::ptrdiff_t> row_to_col(n, kUnassigned);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = static_cast<std::ptrdiff_t>(j - 1);
  return row_to_col;
}

}  // namespace mlcslm
