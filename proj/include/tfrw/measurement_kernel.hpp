#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "tfrw/quadrature.hpp"
#include "tfrw/spectral_profile.hpp"
#include "tfrw/universe_state.hpp"

namespace tfrw {

/// Parameters of an emitter/detector pair with Lorentzian lines.
struct LorentzianPair {
  std::complex<double> gamma_emit{1.0, 0.0};
  std::complex<double> gamma_detect{1.0, 0.0};
  double linewidth_emit = 1.0;
  double linewidth_detect = 1.0;
  double center_emit = 0.0;
  double center_detect = 0.0;
};

inline QuadOptions default_kernel_quadrature() {
  QuadOptions o;
  o.rel_tol = 1e-9;
  o.abs_tol = 1e-300;
  o.max_segments = 20000;
  return o;
}

/// integral conj(g(w / g_scale)) f(w / f_scale) dw over the real line.
std::complex<double> profile_overlap(const SpectralProfile& f, double f_scale,
                                     const SpectralProfile& g, double g_scale,
                                     const QuadOptions& opts =
                                         default_kernel_quadrature());

/// q at scale-factor ratio r = a/c:
///   q(r) = r^{-1/2} * integral conj(g(w / r)) f(w) dw.
std::complex<double> q_numeric(const SpectralProfile& f,
                               const SpectralProfile& g, double r,
                               const QuadOptions& opts =
                                   default_kernel_quadrature());

/// q evaluated in its two-scale-factor form
///   (a c)^{-1/2} * integral conj(g(w / a)) f(w / c) dw,
/// without first reducing to the ratio.
std::complex<double> q_numeric_pair(const SpectralProfile& f,
                                    const SpectralProfile& g, double a,
                                    double c,
                                    const QuadOptions& opts =
                                        default_kernel_quadrature());

/// Contour-integral closed form for two Lorentzian lines:
///   2 pi conj(g0) g1 sqrt(r) / ((G0/2 + i w0) + (G1/2 - i w1) r).
std::complex<double> q_lorentzian_closed(const LorentzianPair& p, double r);

/// The Lorentzian parameters of a profile pair, if both are Lorentzian
/// (NearDelta counts as Lorentzian).
std::optional<LorentzianPair> lorentzian_pair(const SpectralProfile& f,
                                              const SpectralProfile& g);

/// Back-action kernel as a function of the ratio r = a/c, raised to a power.
class MeasurementKernel {
 public:
  struct Quadrature {
    SpectralProfile emit;
    SpectralProfile detect;
    QuadOptions opts;
  };
  struct LorentzianClosed {
    LorentzianPair params;
  };
  /// Cubic interpolation of q in ln r.
  struct TabulatedRatio {
    std::vector<double> log_r;
    std::vector<std::complex<double>> values;
  };
  using Backend = std::variant<Quadrature, LorentzianClosed, TabulatedRatio>;

  MeasurementKernel(Backend backend, unsigned power = 1);

  static MeasurementKernel from_profiles(const SpectralProfile& f,
                                         const SpectralProfile& g);
  static MeasurementKernel closed_form(const LorentzianPair& p);

  const Backend& backend() const noexcept { return backend_; }
  unsigned power() const noexcept { return power_; }

  /// q(r)^power
  std::complex<double> operator()(double r) const;

  /// q(a, c)^power, using only the ratio.
  std::complex<double> operator()(double a, double c) const {
    return (*this)(a / c);
  }

  /// Same kernel with its base q sampled on n log-spaced ratios.
  MeasurementKernel tabulated(double r_min, double r_max, std::size_t n) const;

 private:
  std::complex<double> base(double r) const;

  Backend backend_;
  unsigned power_;
};

/// Kernel evaluating q(r)^times (times >= 1 multiplies the current power).
MeasurementKernel kernel_power(const MeasurementKernel& k, unsigned times);

struct PeakResult {
  double r_star;
  double q_abs_max;
};

/// Maximizes |q(r)| on [r_lo, r_hi] by golden-section search in ln r after a
/// coarse scan confirms a single interior maximum. Throws MultimodalError
/// with one bracket per local maximum otherwise.
PeakResult peak_ratio(const MeasurementKernel& k, double r_lo, double r_hi,
                      std::size_t scan_points = 256);

/// Full width at half maximum of |q(r)^power| measured in ln r, from a scan
/// of n log-spaced ratios with linear interpolation of the crossings.
double log_fwhm(const MeasurementKernel& k, double r_lo, double r_hi,
                std::size_t n = 20001);

/// q(a_i / c_j) for every pair of points on a grid. On log-uniform grids
/// every ratio is exp((i - j) * step), so only 2n - 1 values are computed
/// exactly; other grids go through a cubic table in ln r.
class RatioTable {
 public:
  RatioTable(const MeasurementKernel& k, const ScaleGrid& grid);

  std::complex<double> operator()(std::size_t i, std::size_t j) const;

 private:
  bool by_offset_;
  std::size_t n_;
  std::vector<std::complex<double>> offset_values_;
  std::vector<std::complex<double>> dense_;
};

}  // namespace tfrw
