#pragma once

#include "kstab/rational.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace kstab {

/// Dense exact-rational matrix, row major.
struct RatMat {
  std::size_t rows = 0, cols = 0;
  std::vector<Rat> data;

  RatMat() = default;
  RatMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, Rat(0)) {}

  Rat& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const Rat& at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool symmetric() const {
    if (rows != cols) return false;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = i + 1; j < cols; ++j)
        if (at(i, j) != at(j, i)) return false;
    return true;
  }
};

/// Gaussian elimination with partial (nonzero) pivoting; nullopt if singular.
inline std::optional<RatVec> solve(RatMat a, RatVec b) {
  const std::size_t n = a.rows;
  if (a.cols != n || b.size() != n) throw InputError("solve: dimension mismatch");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a.at(piv, col) == 0) ++piv;
    if (piv == n) return std::nullopt;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(piv, j), a.at(col, j));
      std::swap(b[piv], b[col]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      if (a.at(i, col) == 0) continue;
      Rat f = a.at(i, col) / a.at(col, col);
      for (std::size_t j = col; j < n; ++j) a.at(i, j) -= f * a.at(col, j);
      b[i] -= f * b[col];
    }
  }
  RatVec x(n, Rat(0));
  for (std::size_t i = n; i-- > 0;) {
    Rat s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a.at(i, j) * x[j];
    x[i] = s / a.at(i, i);
  }
  return x;
}

inline Rat determinant(RatMat a) {
  const std::size_t n = a.rows;
  Rat det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a.at(piv, col) == 0) ++piv;
    if (piv == n) return Rat(0);
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(piv, j), a.at(col, j));
      det = -det;
    }
    det *= a.at(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      if (a.at(i, col) == 0) continue;
      Rat f = a.at(i, col) / a.at(col, col);
      for (std::size_t j = col; j < n; ++j) a.at(i, j) -= f * a.at(col, j);
    }
  }
  return det;
}

/// Sylvester criterion on -M: leading principal minors of -M all positive.
inline bool negative_definite(const RatMat& m) {
  if (m.rows != m.cols) return false;
  for (std::size_t k = 1; k <= m.rows; ++k) {
    RatMat sub(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) sub.at(i, j) = -m.at(i, j);
    if (determinant(sub) <= 0) return false;
  }
  return true;
}

}  // namespace kstab
