#include "rnnalg/kernels.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rnnalg {

namespace {
std::atomic<int> g_threads{1};

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr size_t kParallelCutoff = 1 << 15;

int effective_threads() {
#ifdef _OPENMP
  int t = g_threads.load();
  if (t == 0) return omp_get_max_threads();
  return t;
#else
  return 1;
#endif
}
}  // namespace

void set_threads(int t) { g_threads.store(t < 0 ? 1 : t); }

int threads() { return effective_threads(); }

namespace kernels {

namespace {

void check_matmul(const Tensor& a, const Tensor& b, const Tensor& c, int ar,
                  int ac, int br, int bc, const char* what) {
  if (ac != br) {
    throw ShapeError(std::string(what) + ": inner dimensions disagree (" +
                     std::to_string(ac) + " vs " + std::to_string(br) + ")");
  }
  if (c.rows != ar || c.cols != bc) {
    throw ShapeError(std::string(what) + ": output shape mismatch");
  }
  (void)a;
  (void)b;
}

}  // namespace

void matmul_serial(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_matmul(a, b, c, a.rows, a.cols, b.rows, b.cols, "matmul");
  const int k = a.cols;
  for (int r = 0; r < c.rows; ++r) {
    const float* ar = a.row(r);
    for (int q = 0; q < c.cols; ++q) {
      double acc = accumulate ? double(c.at(r, q)) : 0.0;
      for (int i = 0; i < k; ++i) acc += double(ar[i]) * double(b.at(i, q));
      c.at(r, q) = float(acc);
    }
  }
}

void matmul_bt_serial(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_matmul(a, b, c, a.rows, a.cols, b.cols, b.rows, "matmul_bt");
  const int k = a.cols;
  for (int r = 0; r < c.rows; ++r) {
    const float* ar = a.row(r);
    for (int q = 0; q < c.cols; ++q) {
      const float* bq = b.row(q);
      double acc = accumulate ? double(c.at(r, q)) : 0.0;
      for (int i = 0; i < k; ++i) acc += double(ar[i]) * double(bq[i]);
      c.at(r, q) = float(acc);
    }
  }
}

void matmul_at_serial(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_matmul(a, b, c, a.cols, a.rows, b.rows, b.cols, "matmul_at");
  const int k = a.rows;
  for (int r = 0; r < c.rows; ++r) {
    for (int q = 0; q < c.cols; ++q) {
      double acc = accumulate ? double(c.at(r, q)) : 0.0;
      for (int i = 0; i < k; ++i) acc += double(a.at(i, r)) * double(b.at(i, q));
      c.at(r, q) = float(acc);
    }
  }
}

Tensor row_norms_serial(const Tensor& a) {
  Tensor out(a.rows, 1);
  for (int r = 0; r < a.rows; ++r) {
    const float* ar = a.row(r);
    double acc = 0.0;
    for (int c = 0; c < a.cols; ++c) acc += double(ar[c]) * double(ar[c]);
    out.v[r] = float(std::sqrt(acc));
  }
  return out;
}

#ifdef _OPENMP

void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  const size_t work = size_t(c.rows) * size_t(c.cols) * size_t(a.cols);
  const int t = effective_threads();
  if (t <= 1 || work < kParallelCutoff) {
    matmul_serial(a, b, c, accumulate);
    return;
  }
  check_matmul(a, b, c, a.rows, a.cols, b.rows, b.cols, "matmul");
  const int k = a.cols;
#pragma omp parallel for schedule(static) num_threads(t)
  for (int r = 0; r < c.rows; ++r) {
    const float* ar = a.row(r);
    for (int q = 0; q < c.cols; ++q) {
      double acc = accumulate ? double(c.at(r, q)) : 0.0;
      for (int i = 0; i < k; ++i) acc += double(ar[i]) * double(b.at(i, q));
      c.at(r, q) = float(acc);
    }
  }
}

void matmul_bt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  const size_t work = size_t(c.rows) * size_t(c.cols) * size_t(a.cols);
  const int t = effective_threads();
  if (t <= 1 || work < kParallelCutoff) {
    matmul_bt_serial(a, b, c, accumulate);
    return;
  }
  check_matmul(a, b, c, a.rows, a.cols, b.cols, b.rows, "matmul_bt");
  const int k = a.cols;
#pragma omp parallel for schedule(static) num_threads(t)
  for (int r = 0; r < c.rows; ++r) {
    const float* ar = a.row(r);
    for (int q = 0; q < c.cols; ++q) {
      const float* bq = b.row(q);
      double acc = accumulate ? double(c.at(r, q)) : 0.0;
      for (int i = 0; i < k; ++i) acc += double(ar[i]) * double(bq[i]);
      c.at(r, q) = float(acc);
    }
  }
}

void matmul_at(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  const size_t work = size_t(c.rows) * size_t(c.cols) * size_t(a.rows);
  const int t = effective_threads();
  if (t <= 1 || work < kParallelCutoff) {
    matmul_at_serial(a, b, c, accumulate);
    return;
  }
  check_matmul(a, b, c, a.cols, a.rows, b.rows, b.cols, "matmul_at");
  const int k = a.rows;
#pragma omp parallel for schedule(static) num_threads(t)
  for (int r = 0; r < c.rows; ++r) {
    for (int q = 0; q < c.cols; ++q) {
      double acc = accumulate ? double(c.at(r, q)) : 0.0;
      for (int i = 0; i < k; ++i) acc += double(a.at(i, r)) * double(b.at(i, q));
      c.at(r, q) = float(acc);
    }
  }
}

Tensor row_norms(const Tensor& a) {
  const size_t work = a.size();
  const int t = effective_threads();
  if (t <= 1 || work < kParallelCutoff) return row_norms_serial(a);
  Tensor out(a.rows, 1);
#pragma omp parallel for schedule(static) num_threads(t)
  for (int r = 0; r < a.rows; ++r) {
    const float* ar = a.row(r);
    double acc = 0.0;
    for (int c = 0; c < a.cols; ++c) acc += double(ar[c]) * double(ar[c]);
    out.v[r] = float(std::sqrt(acc));
  }
  return out;
}

#else  // no OpenMP: dispatchers collapse to the serial reference

void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  matmul_serial(a, b, c, accumulate);
}
void matmul_bt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  matmul_bt_serial(a, b, c, accumulate);
}
void matmul_at(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  matmul_at_serial(a, b, c, accumulate);
}
Tensor row_norms(const Tensor& a) { return row_norms_serial(a); }

#endif

double sum_all(const Tensor& a) {
  double acc = 0.0;
  for (float x : a.v) acc += double(x);
  return acc;
}

}  // namespace kernels
}  // namespace rnnalg
