#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rnnalg/errors.hpp"
#include "rnnalg/rng.hpp"

namespace rnnalg {

// Dense row-major float32 matrix.  Row and column vectors are 1xC / Rx1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<float> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(size_t(r) * size_t(c), 0.0f) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }

  static Tensor full(int r, int c, float value) {
    Tensor t(r, c);
    for (auto& x : t.v) x = value;
    return t;
  }

  static Tensor identity(int n) {
    Tensor t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0f;
    return t;
  }

  static Tensor uniform(int r, int c, float lo, float hi, SeededRng& rng) {
    Tensor t(r, c);
    for (auto& x : t.v) x = rng.uniform(lo, hi);
    return t;
  }

  static Tensor normal(int r, int c, float mean, float stddev, SeededRng& rng) {
    Tensor t(r, c);
    for (auto& x : t.v) x = rng.normal(mean, stddev);
    return t;
  }

  size_t size() const { return v.size(); }

  float& at(int r, int c) { return v[size_t(r) * cols + c]; }
  float at(int r, int c) const { return v[size_t(r) * cols + c]; }

  float* row(int r) { return v.data() + size_t(r) * cols; }
  const float* row(int r) const { return v.data() + size_t(r) * cols; }

  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  // Copies row r into a fresh 1xC tensor.
  Tensor row_copy(int r) const {
    Tensor out(1, cols);
    for (int c = 0; c < cols; ++c) out.v[c] = at(r, c);
    return out;
  }
};

inline bool all_finite(const Tensor& t) {
  for (float x : t.v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a.v[i] != b.v[i]) return false;
  }
  return true;
}

}  // namespace rnnalg
