#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>

namespace tfrw {

using ComplexIntegrand = std::function<std::complex<double>(double)>;

struct QuadOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-15;
  std::size_t max_segments = 5000;
};

struct QuadResult {
  std::complex<double> value;
  double error = 0.0;  ///< estimated absolute error
  std::size_t evaluations = 0;
  std::size_t segments = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature of a complex
/// integrand over [lo, hi]. Throws QuadratureFailure when the segment budget
/// is exhausted before the tolerance is met.
QuadResult integrate(const ComplexIntegrand& f, double lo, double hi,
                     const QuadOptions& opts = {});

/// Integral over the whole real line. The line is cut at the sorted
/// `breakpoints` (at least one); the two semi-infinite tails are mapped onto
/// (0, 1] with x = b +/- scale * (1 - t) / t. Placing breakpoints at the
/// integrand's peaks lets narrow features be resolved without searching.
QuadResult integrate_real_line(const ComplexIntegrand& f,
                               std::span<const double> breakpoints,
                               double tail_scale = 1.0,
                               const QuadOptions& opts = {});

}  // namespace tfrw
