#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

namespace tfrw {

enum class Spacing { LogUniform, Uniform, Explicit };

const char* to_string(Spacing s);

/// Strictly increasing, strictly positive scale-factor sample points with
/// trapezoid weights for integrals over da.
class ScaleGrid {
 public:
  static ScaleGrid log_uniform(double a_min, double a_max, std::size_t n);
  static ScaleGrid uniform(double a_min, double a_max, std::size_t n);
  static ScaleGrid from_points(std::vector<double> points);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  Spacing spacing() const noexcept { return spacing_; }

  std::span<const double> points() const noexcept { return points_; }
  std::span<const double> log_points() const noexcept { return logs_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Step in ln a; only meaningful for log-uniform grids.
  double log_step() const;

  bool contains(double a) const noexcept {
    return a >= points_.front() && a <= points_.back();
  }

  friend bool operator==(const ScaleGrid& a, const ScaleGrid& b) {
    return a.points_ == b.points_;
  }

 private:
  ScaleGrid(std::vector<double> points, Spacing spacing);

  std::vector<double> points_;
  std::vector<double> logs_;
  std::vector<double> weights_;
  Spacing spacing_;
};

ScaleGrid make_log_grid(double a_min, double a_max, std::size_t n);

/// Trapezoid weights for sorted sample points.
std::vector<double> trapezoid_weights(std::span<const double> x);

/// Universe wavefunction h(a) sampled on a ScaleGrid. Immutable once built.
class UniverseWavefunction {
 public:
  UniverseWavefunction(ScaleGrid grid,
                       std::vector<std::complex<double>> amplitudes);

  const ScaleGrid& grid() const noexcept { return grid_; }
  std::span<const std::complex<double>> amplitudes() const noexcept {
    return amplitudes_;
  }
  std::complex<double> operator[](std::size_t i) const {
    return amplitudes_[i];
  }
  std::size_t size() const noexcept { return amplitudes_.size(); }

  /// Integral of |h|^2 da.
  double norm_squared() const;

  /// |h(a_i)|^2
  std::vector<double> density() const;

 private:
  ScaleGrid grid_;
  std::vector<std::complex<double>> amplitudes_;
};

struct Normalized {
  UniverseWavefunction state;
  double norm_before;  ///< integral of |h|^2 da of the input
};

/// Throws DegenerateState on a zero-norm input.
Normalized normalize(const UniverseWavefunction& psi);

/// Normalized real packet proportional to exp(-(a - a0)^2 / (4 sigma^2)).
UniverseWavefunction gaussian_packet(const ScaleGrid& grid, double a0,
                                     double sigma);

struct Moments {
  double mean_a = 0.0;
  double std_a = 0.0;
  double fwhm_a = 0.0;
  double half_max_center = 0.0;  ///< midpoint of the half-maximum interval
  double peak_a = 0.0;
  bool multimodal = false;  ///< more than two half-maximum crossings
};

Moments moments(const UniverseWavefunction& psi);

/// Integral of conj(h1) h2 da. Grids must match.
std::complex<double> overlap(const UniverseWavefunction& psi1,
                             const UniverseWavefunction& psi2);

/// sqrt of the integral of |h1 - h2|^2 da.
double l2_distance(const UniverseWavefunction& psi1,
                   const UniverseWavefunction& psi2);

/// CSV with columns a, re_h, im_h and a one-line header.
void write_csv(std::ostream& os, const UniverseWavefunction& psi);

nlohmann::json to_json(const ScaleGrid& grid);
nlohmann::json to_json(const UniverseWavefunction& psi);
UniverseWavefunction wavefunction_from_json(const nlohmann::json& j);

}  // namespace tfrw
