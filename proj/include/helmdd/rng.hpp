#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace helmdd {

/// Deterministic splitmix64-based generator. Used instead of <random>
/// distributions so that fixed seeds give identical streams on every
/// platform, which the reporting layer relies on for byte-stable output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

  std::complex<double> complex_uniform() {
    double re = uniform(-1.0, 1.0);
    double im = uniform(-1.0, 1.0);
    return {re, im};
  }

  Eigen::VectorXcd complex_vector(Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_uniform();
    return v;
  }

  Eigen::VectorXd real_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(-1.0, 1.0);
    return v;
  }

 private:
  std::uint64_t state_;
};

}  // namespace helmdd
