#pragma once

#include <complex>
#include <variant>
#include <vector>

#include <json.hpp>

namespace tfrw {

/// p(w) = i conj(gamma) / (linewidth/2 - i (w - center)).
struct Lorentzian {
  std::complex<double> gamma{1.0, 0.0};
  double linewidth = 1.0;
  double center = 0.0;
};

/// p(w) = amplitude * exp(-(w - center)^2 / (4 sigma^2)); |p|^2 has std sigma.
struct GaussianProfile {
  std::complex<double> amplitude{1.0, 0.0};
  double sigma = 1.0;
  double center = 0.0;
};

/// Linearly interpolated samples, zero outside the table.
struct Tabulated {
  std::vector<double> omega;
  std::vector<std::complex<double>> values;
};

/// Unit-norm Lorentzian of linewidth epsilon: the delta-function limit.
struct NearDelta {
  double center = 0.0;
  double epsilon = 1e-3;
};

/// A peak of a profile, used to place quadrature breakpoints.
struct SpectralFeature {
  double center;
  double width;
};

/// Coordinate-frequency wavepacket shape (emission f or absorption g).
class SpectralProfile {
 public:
  using Kind = std::variant<Lorentzian, GaussianProfile, Tabulated, NearDelta>;

  /// Validates the shape parameters; throws InvalidArgument.
  SpectralProfile(Kind kind);

  static SpectralProfile lorentzian(std::complex<double> gamma,
                                    double linewidth, double center);
  /// Lorentzian with |gamma|^2 = linewidth / (2 pi), i.e. unit L2 norm.
  static SpectralProfile normalized_lorentzian(double linewidth,
                                               double center);
  static SpectralProfile gaussian(std::complex<double> amplitude, double sigma,
                                  double center);
  static SpectralProfile tabulated(std::vector<double> omega,
                                   std::vector<std::complex<double>> values);
  static SpectralProfile near_delta(double center, double epsilon);

  const Kind& kind() const noexcept { return kind_; }

  std::complex<double> operator()(double omega) const;

  /// Peak centers and widths; tabulated profiles report their support.
  std::vector<SpectralFeature> features() const;

  /// The profile multiplied by a constant.
  SpectralProfile scaled(std::complex<double> factor) const;

  /// NearDelta profiles expressed as their Lorentzian.
  SpectralProfile as_lorentzian_if_possible() const;

 private:
  Kind kind_;
};

std::complex<double> evaluate(const SpectralProfile& p, double omega);

/// sqrt of the integral of |p|^2 over the real line, by adaptive quadrature.
double l2_norm(const SpectralProfile& p);

/// g(w) = sqrt(s) f(s w): the detector shape that best matches f after a
/// scaling by s.
SpectralProfile matched_profile(const SpectralProfile& f, double s);

SpectralProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SpectralProfile& p);

}  // namespace tfrw
