#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tfrw/evolution_kernel.hpp"
#include "tfrw/measurement_pipeline.hpp"

namespace tfrw {

struct FreePotential {};

/// V(x) = M Omega^2 (x - x_eq)^2 / 2
struct HarmonicPotential {
  double omega = 0.0;
  double x_eq = 0.0;
};

using MechanicalPotential = std::variant<FreePotential, HarmonicPotential>;

/// Single cavity of length x = a_om x0 closed by a mirror of mass M, holding
/// N photons in mode n. Natural units by default.
struct OptomechParams {
  double mass = 1.0;
  double x0 = 1.0;
  unsigned mode = 1;
  double photons = 1.0;
  double hbar = 1.0;
  double c_light = 1.0;
  MechanicalPotential potential = FreePotential{};

  /// Throws InvalidArgument on non-physical values.
  void validate() const;

  /// K in a_dd = K / a^2: hbar n pi c N / (2 x0^3 M).
  double pressure_constant() const;
};

struct OptomechState {
  double a_om = 1.0;
  double a_dot = 0.0;
  double t = 0.0;
};

enum class Integrator { VelocityVerlet, Rk4 };

std::string_view to_string(Integrator m);
Integrator integrator_from_string(std::string_view s);

/// a_dd = K / a^2 - V'(x) / (M x0). Throws SingularityError for a <= 0.
double free_mirror_accel(const OptomechState& s, const OptomechParams& p);

/// Trajectory of length steps + 1 starting at s0. Throws CollapseError with
/// the offending step index if the cavity length reaches zero.
std::vector<OptomechState> integrate_trajectory(
    const OptomechState& s0, const OptomechParams& p, double dt,
    std::size_t steps, Integrator method = Integrator::VelocityVerlet);

/// E = M x0^2 a_dot^2 / 2 + hbar n pi c N / (2 x0 a) + V(x)
double mechanical_energy(const OptomechState& s, const OptomechParams& p);

/// Limit of a_dot as a -> infinity for the free mirror: sqrt(2E/M) / x0.
double terminal_rate(const OptomechState& s0, const OptomechParams& p);

/// One cavity of the two-cavity construction.
struct CavityLine {
  double omega0 = 0.0;  ///< resonance at x = 0
  double pull = 1.0;    ///< G_k = d omega_k / dx
  double detuning = -1.0;  ///< Delta_k at x = 0
};

struct RotatingFrameConfig {
  std::array<CavityLine, 2> cavities{};
  double delta_over_g = -1.0;  ///< the shared ratio Delta / G

  /// Checks the shared-ratio constraint (ConfigurationError quoting both
  /// ratios) and nonzero pulls.
  void validate() const;
};

/// Tolerance of the shared-ratio constraint.
inline constexpr double kRatioTolerance = 1e-12;

/// a_om = Delta / (Delta + G x). Throws InvalidRange when Delta + G x is zero
/// or has the opposite sign of Delta.
double a_om_of_x(double x, const RotatingFrameConfig& cfg);

/// x = (Delta / G)(1 - a) / a. Throws InvalidRange for a <= 0.
double x_of_a_om(double a, const RotatingFrameConfig& cfg);

struct RotatingFrequencies {
  std::array<double, 2> nu{};           ///< rotating-frame frequencies
  std::array<double, 2> omega_tilde{};  ///< effective atomic frequencies
};

/// nu_k = omega_k(0) + (G_k / G) Delta and omega_tilde_k = -Delta_k. Throws
/// ConfigurationError when the constraint fails or omega_tilde_k <= 0.
RotatingFrequencies rotating_frame_frequencies(const RotatingFrameConfig& cfg);

/// -hbar (G_k x + Delta_k), the optical energy per photon in cavity k.
double optical_energy_per_photon(double x, const RotatingFrameConfig& cfg,
                                 std::size_t k, double hbar = 1.0);

/// Constant conformal-time mirror velocity dx/d eta = (-Delta / G) H.
double hubble_mirror_velocity(double hubble, const RotatingFrameConfig& cfg);

struct ConformalSample {
  double eta = 0.0;
  double x = 0.0;
  double a_om = 1.0;
};

/// Samples a(eta) = a0 / (1 - a0 H eta), the solution of H = a^-2 da/d eta,
/// and x(eta) through x_of_a_om, on steps + 1 equally spaced eta in
/// [0, eta_max]. Throws InvalidRange if a diverges inside the interval.
std::vector<ConformalSample> conformal_trajectory(double hubble, double a0,
                                                  double eta_max,
                                                  std::size_t steps,
                                                  const RotatingFrameConfig& cfg);

/// Wavefunction of the mirror displacement on increasing sample points.
struct MirrorWavefunction {
  std::vector<double> x;
  std::vector<std::complex<double>> amplitudes;

  /// Trapezoid integral of |psi|^2 dx.
  double norm_squared() const;
};

/// Normalized real Gaussian exp(-(x - x_c)^2 / (4 sigma^2)) on n points.
MirrorWavefunction gaussian_mirror_packet(double x_min, double x_max,
                                          std::size_t n, double x_c,
                                          double sigma);

struct MirrorUpdate {
  MirrorWavefunction prior;      ///< the input, normalized
  MirrorWavefunction posterior;  ///< normalized
  UniverseWavefunction prior_a;  ///< prior carried onto the a_om grid
  UniverseWavefunction posterior_a;
  double detect_weight = 0.0;
};

/// Carries psi(x) to a_om with the discrete Jacobian that preserves the norm,
/// post-selects on the event and maps back. Without an evolution kernel the
/// photon is referenced to a = 1 (x = 0): h1(a) ~ q(a) h0(a).
MirrorUpdate mirror_posterior_update(
    const MirrorWavefunction& psi_x, const RotatingFrameConfig& cfg,
    const MeasurementEvent& event,
    const std::optional<EvolutionKernel>& evolution = std::nullopt);

OptomechParams optomech_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OptomechParams& p);
RotatingFrameConfig rotating_frame_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RotatingFrameConfig& cfg);

}  // namespace tfrw
