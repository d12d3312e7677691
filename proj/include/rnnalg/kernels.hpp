#pragma once

#include <cstddef>

#include "rnnalg/tensor.hpp"

namespace rnnalg {

// Global kernel thread budget.  1 (the default) selects the serial path;
// values > 1 enable the OpenMP kernels; 0 means "all hardware threads".
// Every parallel kernel partitions output elements and keeps a fixed inner
// summation order, so results are bit-identical for any thread count.
void set_threads(int t);
int threads();

namespace kernels {

// c (+)= a * b          a: RxK, b: KxC, c: RxC
void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// c (+)= a * b^T        a: RxK, b: CxK, c: RxC
void matmul_bt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// c (+)= a^T * b        a: KxR, b: KxC, c: RxC
void matmul_at(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

// Serial reference implementations.  The parallel kernels above must agree
// with these bit-for-bit; tests and the benchmark target compare them.
void matmul_serial(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
void matmul_bt_serial(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
void matmul_at_serial(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

// Per-row Euclidean norms, Rx1, accumulated in double.
Tensor row_norms(const Tensor& a);
Tensor row_norms_serial(const Tensor& a);

// Sum of all entries, accumulated in double.
double sum_all(const Tensor& a);

// Numerically safe scalar activations.
inline float sigmoidf(float x) {
  if (x >= 0.0f) {
    float e = std::exp(-x);
    return 1.0f / (1.0f + e);
  }
  float e = std::exp(x);
  return e / (1.0f + e);
}

inline float dsigmoidf(float y) { return y * (1.0f - y); }  // y = sigmoid(x)
inline float dtanhf(float y) { return 1.0f - y * y; }       // y = tanh(x)

}  // namespace kernels
}  // namespace rnnalg
