#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "eeg2shape/tensor.hpp"

namespace e2s {

// Deterministic random source. All distributions are derived from the raw
// mt19937_64 stream with fixed arithmetic, so a seed pins the exact value
// sequence independent of the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  // Standard normal via Box-Muller, one spare cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * M_PI * u2;
    spare_ = mag * std::sin(ang);
    has_spare_ = true;
    return mag * std::cos(ang);
  }

  // Normal truncated to +-clip_sigmas by redraw.
  double truncated_normal(double stddev, double clip_sigmas = 2.0) {
    double x = normal();
    while (std::fabs(x) > clip_sigmas) x = normal();
    return x * stddev;
  }

  template <typename T>
  void fill_normal(TensorT<T>& t, double stddev) {
    for (long long i = 0; i < t.size(); ++i) t[i] = static_cast<T>(normal() * stddev);
  }

  template <typename T>
  void fill_truncated_normal(TensorT<T>& t, double stddev, double clip_sigmas = 2.0) {
    for (long long i = 0; i < t.size(); ++i) {
      t[i] = static_cast<T>(truncated_normal(stddev, clip_sigmas));
    }
  }

  template <typename V>
  void shuffle(V& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace e2s
