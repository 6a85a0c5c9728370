#pragma once

// Oracles and generators shared by the unit tests. Nothing here calls into
// the library's numerical code paths.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace tfrw_test {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

// Fixed-seed generator for property sweeps.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }

 private:
  std::mt19937_64 rng_;
};

// Residue-theorem value of r^{-1/2} integral conj(g(w/r)) f(w) dw for
// f(w) = i conj(g0) / (G0/2 - i(w - w0)), g(w) = i conj(g1) / (G1/2 - i(w - w1)).
inline cplx q_closed(cplx g0, cplx g1, double G0, double G1, double w0,
                     double w1, double r) {
  const cplx i{0.0, 1.0};
  return 2.0 * kPi * std::conj(g0) * g1 * std::sqrt(r) /
         ((G0 / 2.0 + i * w0) + (G1 / 2.0 - i * w1) * r);
}

// Plain trapezoid rule on arbitrary points.
inline double trapz(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  }
  return s;
}

inline std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) *
                                         static_cast<double>(i) /
                                         static_cast<double>(n - 1));
  }
  return out;
}

}  // namespace tfrw_test
