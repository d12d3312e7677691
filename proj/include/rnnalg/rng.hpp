#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace rnnalg {

// Deterministic 64-bit generator (splitmix64).  The state advances by the
// golden-ratio increment and each output is finalized with two
// xorshift-multiply rounds:
//
//   s += 0x9e3779b97f4a7c15
//   z  = s
//   z  = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z  = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   out= z ^ (z >> 31)
//
// Identical seeds yield identical streams on every platform.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return finalize(state_);
  }

  // Uniform double in [0, 1), 53 bits of the output word.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  float uniform(float lo, float hi) {
    return lo + float(uniform()) * (hi - lo);
  }

  // Box-Muller; the second deviate of each pair is cached.
  float normal(float mean, float stddev) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = float(r * std::sin(theta));
    have_spare_ = true;
    return mean + stddev * float(r * std::cos(theta));
  }

  // Uniform index in [0, n).  Modulo bias is < 2^-53 for any n we use.
  size_t index(size_t n) { return size_t(next_u64() % n); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Hash-combines tags into a fresh seed.  Used to derive independent
  // streams per sweep cell, probe test, scan repeat, etc.
  static uint64_t derive(uint64_t seed, std::initializer_list<uint64_t> tags) {
    uint64_t z = finalize(seed + 0x9e3779b97f4a7c15ULL);
    for (uint64_t t : tags) {
      z = finalize(z ^ (t + 0x9e3779b97f4a7c15ULL + (z << 6) + (z >> 2)));
    }
    return z;
  }

 private:
  static uint64_t finalize(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_;
  bool have_spare_ = false;
  float spare_ = 0.0f;
};

}  // namespace rnnalg
