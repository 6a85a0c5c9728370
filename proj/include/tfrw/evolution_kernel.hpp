#pragma once

#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tfrw/universe_state.hpp"

namespace tfrw {

struct IdentityEvolution {};

/// B(a, c) = delta(a - s c): every scale factor grows by s.
struct UniformScaling {
  double s = 1.0;
};

/// B(a, c) = (1/a) N(ln a - ln s - ln c; width): uniform scaling smeared by a
/// Gaussian of standard deviation `width` in ln a. Tends to UniformScaling
/// as width -> 0 and composes by adding widths in quadrature.
struct BroadenedScaling {
  double s = 1.0;
  double width = 0.1;
};

/// Samples B(a_i, c_j) on a fixed grid.
struct DenseEvolution {
  ScaleGrid grid;
  Eigen::MatrixXcd values;
};

/// Evolution of the universe wavefunction between two epochs.
class EvolutionKernel {
 public:
  using Kind = std::variant<IdentityEvolution, UniformScaling,
                            BroadenedScaling, DenseEvolution>;

  EvolutionKernel(Kind kind);

  static EvolutionKernel identity() { return EvolutionKernel(IdentityEvolution{}); }
  static EvolutionKernel uniform_scaling(double s);
  static EvolutionKernel broadened_scaling(double s, double width);
  static EvolutionKernel dense(ScaleGrid grid, Eigen::MatrixXcd values);

  const Kind& kind() const noexcept { return kind_; }

  /// For delta-supported kernels (Identity, UniformScaling) the single ratio
  /// a/c they connect; nullopt for kernels with spread.
  std::optional<double> delta_ratio() const;

  /// Matrix L of the discretized map h1_i = sum_j L_ij h0_j on `grid`
  /// (quadrature weights included, no renormalization).
  Eigen::MatrixXcd linear_map(const ScaleGrid& grid) const;

 private:
  Kind kind_;
};

/// Result of an unnormalized application.
struct Propagated {
  std::vector<std::complex<double>> amplitudes;
  double lost_fraction = 0.0;  ///< prior mass mapped off the grid
};

/// Unnormalized h1(a) = integral B(a, c) h0(c) dc on the wavefunction's grid.
Propagated propagate(const EvolutionKernel& b, const UniverseWavefunction& psi);

/// Relative mass loss above which apply() raises SupportTruncation.
inline constexpr double kTruncationTolerance = 1e-6;

/// Normalized application. Throws SupportTruncation if more than
/// kTruncationTolerance of the probability leaves the grid.
UniverseWavefunction apply(const EvolutionKernel& b,
                           const UniverseWavefunction& psi);

/// B1 o B2: the kernel of applying b2 first, then b1.
EvolutionKernel compose(const EvolutionKernel& b1, const EvolutionKernel& b2);

EvolutionKernel evolution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvolutionKernel& b);

}  // namespace tfrw
