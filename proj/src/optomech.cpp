#include "tfrw/optomech.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/core.h>

#include "tfrw/errors.hpp"

namespace tfrw {
namespace {

using cplx = std::complex<double>;
using nlohmann::json;

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

// dV/dx divided by M x0, so that it subtracts directly from a_dd.
double potential_accel(double a, const OptomechParams& p) {
  if (const auto* h = std::get_if<HarmonicPotential>(&p.potential)) {
    const double x = a * p.x0;
    return h->omega * h->omega * (x - h->x_eq) / p.x0;
  }
  return 0.0;
}

double potential_energy(double a, const OptomechParams& p) {
  if (const auto* h = std::get_if<HarmonicPotential>(&p.potential)) {
    const double d = a * p.x0 - h->x_eq;
    return 0.5 * p.mass * h->omega * h->omega * d * d;
  }
  return 0.0;
}

double accel(double a, const OptomechParams& p, double K) {
  return K / (a * a) - potential_accel(a, p);
}

[[noreturn]] void collapse(std::size_t step, double a) {
  throw CollapseError(
      fmt::format("cavity length reached zero at step {} (a_om = {:.6g})",
                  step, a),
      step);
}

double ratio_of(const CavityLine& c) { return c.detuning / c.pull; }

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) {
    throw InvalidArgument(fmt::format("field '{}' must be a number", key));
  }
  return j.at(key).get<double>();
}

}  // namespace

void OptomechParams::validate() const {
  if (!positive_finite(mass)) {
    throw InvalidArgument(fmt::format("mirror mass must be positive, got {}", mass));
  }
  if (!positive_finite(x0)) {
    throw InvalidArgument(fmt::format("reference length x0 must be positive, got {}", x0));
  }
  if (mode < 1) throw InvalidArgument("cavity mode index must be at least 1");
  if (!(photons >= 0.0) || !std::isfinite(photons)) {
    throw InvalidArgument(fmt::format("photon number must be nonnegative, got {}", photons));
  }
  if (!positive_finite(hbar) || !positive_finite(c_light)) {
    throw InvalidArgument("hbar and c must be positive");
  }
  if (const auto* h = std::get_if<HarmonicPotential>(&potential)) {
    if (!std::isfinite(h->omega) || !std::isfinite(h->x_eq)) {
      throw InvalidArgument("harmonic potential parameters must be finite");
    }
  }
}

double OptomechParams::pressure_constant() const {
  return hbar * static_cast<double>(mode) * std::numbers::pi * c_light *
         photons / (2.0 * x0 * x0 * x0 * mass);
}

std::string_view to_string(Integrator m) {
  return m == Integrator::Rk4 ? "rk4" : "velocity-verlet";
}

Integrator integrator_from_string(std::string_view s) {
  if (s == "velocity-verlet") return Integrator::VelocityVerlet;
  if (s == "rk4") return Integrator::Rk4;
  throw InvalidArgument(fmt::format(
      "unknown integrator '{}' (expected velocity-verlet or rk4)", s));
}

double free_mirror_accel(const OptomechState& s, const OptomechParams& p) {
  if (!(s.a_om > 0.0)) {
    throw SingularityError(fmt::format(
        "zero-length cavity: a_om = {} must be positive", s.a_om));
  }
  return accel(s.a_om, p, p.pressure_constant());
}

std::vector<OptomechState> integrate_trajectory(const OptomechState& s0,
                                                const OptomechParams& p,
                                                double dt, std::size_t steps,
                                                Integrator method) {
  p.validate();
  if (!positive_finite(dt)) {
    throw InvalidArgument(fmt::format("time step must be positive, got {}", dt));
  }
  if (!(s0.a_om > 0.0)) collapse(0, s0.a_om);

  const double K = p.pressure_constant();
  std::vector<OptomechState> out;
  out.reserve(steps + 1);
  out.push_back(s0);
  double a = s0.a_om;
  double v = s0.a_dot;
  double acc = accel(a, p, K);

  for (std::size_t step = 1; step <= steps; ++step) {
    if (method == Integrator::VelocityVerlet) {
      const double v_half = v + 0.5 * dt * acc;
      a += dt * v_half;
      if (!(a > 0.0)) collapse(step, a);
      acc = accel(a, p, K);
      v = v_half + 0.5 * dt * acc;
    } else {
      auto stage = [&](double ai) {
        if (!(ai > 0.0)) collapse(step, ai);
        return accel(ai, p, K);
      };
      const double k1a = v;
      const double k1v = stage(a);
      const double k2a = v + 0.5 * dt * k1v;
      const double k2v = stage(a + 0.5 * dt * k1a);
      const double k3a = v + 0.5 * dt * k2v;
      const double k3v = stage(a + 0.5 * dt * k2a);
      const double k4a = v + dt * k3v;
      const double k4v = stage(a + dt * k3a);
      a += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
      v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      if (!(a > 0.0)) collapse(step, a);
    }
    out.push_back({a, v, s0.t + static_cast<double>(step) * dt});
  }
  return out;
}

double mechanical_energy(const OptomechState& s, const OptomechParams& p) {
  const double kinetic = 0.5 * p.mass * p.x0 * p.x0 * s.a_dot * s.a_dot;
  const double optical = p.hbar * static_cast<double>(p.mode) *
                         std::numbers::pi * p.c_light * p.photons /
                         (2.0 * p.x0 * s.a_om);
  return kinetic + optical + potential_energy(s.a_om, p);
}

double terminal_rate(const OptomechState& s0, const OptomechParams& p) {
  return std::sqrt(2.0 * mechanical_energy(s0, p) / p.mass) / p.x0;
}

void RotatingFrameConfig::validate() const {
  if (!std::isfinite(delta_over_g) || delta_over_g == 0.0) {
    throw ConfigurationError(fmt::format(
        "Delta/G must be finite and nonzero, got {}", delta_over_g));
  }
  for (std::size_t k = 0; k < 2; ++k) {
    const CavityLine& c = cavities[k];
    if (!std::isfinite(c.pull) || c.pull == 0.0) {
      throw ConfigurationError(
          fmt::format("cavity {}: frequency pull G_{} must be nonzero", k + 1, k + 1));
    }
    if (!std::isfinite(c.detuning) || !std::isfinite(c.omega0)) {
      throw ConfigurationError(fmt::format("cavity {}: non-finite parameters", k + 1));
    }
    const double r = ratio_of(c);
    if (std::abs(r - delta_over_g) >
        kRatioTolerance * std::max(1.0, std::abs(delta_over_g))) {
      throw ConfigurationError(fmt::format(
          "cavity {}: Delta_{}/G_{} = {:.17g} differs from the shared ratio "
          "Delta/G = {:.17g}; both cavities must satisfy Delta_k/G_k = const",
          k + 1, k + 1, k + 1, r, delta_over_g));
    }
  }
}

double a_om_of_x(double x, const RotatingFrameConfig& cfg) {
  // Delta / (Delta + G x) = 1 / (1 + x / (Delta / G))
  const double d = 1.0 + x / cfg.delta_over_g;
  if (!(d > 0.0) || !std::isfinite(x)) {
    throw InvalidRange(fmt::format(
        "x = {:.17g} is on or beyond the pole x = {:.17g} of the scale map",
        x, -cfg.delta_over_g));
  }
  return 1.0 / d;
}

double x_of_a_om(double a, const RotatingFrameConfig& cfg) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw InvalidRange(fmt::format("a_om = {} must be positive and finite", a));
  }
  return cfg.delta_over_g * (1.0 - a) / a;
}

RotatingFrequencies rotating_frame_frequencies(const RotatingFrameConfig& cfg) {
  cfg.validate();
  RotatingFrequencies out;
  for (std::size_t k = 0; k < 2; ++k) {
    const CavityLine& c = cfg.cavities[k];
    out.nu[k] = c.omega0 + c.pull * cfg.delta_over_g;
    out.omega_tilde[k] = -c.detuning;
    const double residual = c.detuning - c.pull * cfg.delta_over_g;
    if (std::abs(residual) > kRatioTolerance * std::max(1.0, std::abs(c.detuning))) {
      throw ConfigurationError(fmt::format(
          "cavity {}: residual constant term {:.3e} does not vanish", k + 1,
          residual));
    }
    if (!(out.omega_tilde[k] > 0.0)) {
      throw ConfigurationError(fmt::format(
          "cavity {}: effective atomic frequency -Delta_{} = {} must be "
          "positive",
          k + 1, k + 1, out.omega_tilde[k]));
    }
  }
  return out;
}

double optical_energy_per_photon(double x, const RotatingFrameConfig& cfg,
                                 std::size_t k, double hbar) {
  if (k >= 2) throw InvalidArgument("cavity index must be 0 or 1");
  const CavityLine& c = cfg.cavities[k];
  return -hbar * (c.pull * x + c.detuning);
}

double hubble_mirror_velocity(double hubble, const RotatingFrameConfig& cfg) {
  return -cfg.delta_over_g * hubble;
}

std::vector<ConformalSample> conformal_trajectory(
    double hubble, double a0, double eta_max, std::size_t steps,
    const RotatingFrameConfig& cfg) {
  if (!positive_finite(a0)) {
    throw InvalidArgument(fmt::format("a0 must be positive, got {}", a0));
  }
  if (!(eta_max >= 0.0) || !std::isfinite(eta_max) || steps < 1) {
    throw InvalidArgument("need eta_max >= 0 and at least one step");
  }
  if (!std::isfinite(hubble)) throw InvalidArgument("H must be finite");
  std::vector<ConformalSample> out;
  out.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double eta =
        eta_max * static_cast<double>(i) / static_cast<double>(steps);
    const double d = 1.0 - a0 * hubble * eta;
    if (!(d > 0.0)) {
      throw InvalidRange(fmt::format(
          "a(eta) diverges at eta = {:.6g} inside [0, {}]", 1.0 / (a0 * hubble),
          eta_max));
    }
    const double a = a0 / d;
    out.push_back({eta, x_of_a_om(a, cfg), a});
  }
  return out;
}

double MirrorWavefunction::norm_squared() const {
  const auto w = trapezoid_weights(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::norm(amplitudes[i]);
  return s;
}

MirrorWavefunction gaussian_mirror_packet(double x_min, double x_max,
                                          std::size_t n, double x_c,
                                          double sigma) {
  if (!(x_max > x_min) || n < 3) {
    throw InvalidArgument("mirror grid needs x_max > x_min and n >= 3");
  }
  if (!positive_finite(sigma)) throw InvalidArgument("sigma must be positive");
  MirrorWavefunction psi;
  psi.x.resize(n);
  psi.amplitudes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_min + (x_max - x_min) * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    psi.x[i] = x;
    const double d = x - x_c;
    psi.amplitudes[i] = std::exp(-d * d / (4.0 * sigma * sigma));
  }
  psi.x.back() = x_max;
  const double m = psi.norm_squared();
  if (!(m > 0.0)) throw DegenerateState("mirror packet has zero norm on its grid");
  for (auto& v : psi.amplitudes) v /= std::sqrt(m);
  return psi;
}

MirrorUpdate mirror_posterior_update(
    const MirrorWavefunction& psi_x, const RotatingFrameConfig& cfg,
    const MeasurementEvent& event,
    const std::optional<EvolutionKernel>& evolution) {
  cfg.validate();
  const std::size_t n = psi_x.x.size();
  if (n < 3 || psi_x.amplitudes.size() != n) {
    throw InvalidArgument("mirror wavefunction needs matching x and amplitudes (n >= 3)");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(psi_x.x[i] > psi_x.x[i - 1])) {
      throw InvalidArgument("mirror x points must be strictly increasing");
    }
  }

  const double mx = psi_x.norm_squared();
  if (!(mx > 0.0)) throw DegenerateState("mirror wavefunction has zero norm");
  MirrorWavefunction prior = psi_x;
  for (auto& v : prior.amplitudes) v /= std::sqrt(mx);

  // a_om is monotone in x; order the a points increasingly.
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = a_om_of_x(prior.x[i], cfg);
  const bool increasing = a.back() > a.front();
  auto to_a = [&](std::size_t i) { return increasing ? i : n - 1 - i; };
  std::vector<double> a_sorted(n);
  for (std::size_t i = 0; i < n; ++i) a_sorted[to_a(i)] = a[i];
  const ScaleGrid grid = ScaleGrid::from_points(a_sorted);

  const auto wx = trapezoid_weights(prior.x);
  const auto wa = grid.weights();
  std::vector<cplx> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = to_a(i);
    h[j] = prior.amplitudes[i] * std::sqrt(wx[i] / wa[j]);
  }
  const UniverseWavefunction prior_a(grid, std::move(h));

  const PipelineResult r =
      evolution ? measure_once(prior_a, *evolution, event)
                : measure_against_reference(prior_a, 1.0, event);

  MirrorWavefunction post;
  post.x = prior.x;
  post.amplitudes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = to_a(i);
    post.amplitudes[i] = r.posterior[j] * std::sqrt(wa[j] / wx[i]);
  }
  return MirrorUpdate{prior, post, prior_a, r.posterior, r.detect_weight};
}

OptomechParams optomech_params_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("optomech section must be an object");
  OptomechParams p;
  p.mass = get_number(j, "mass", p.mass);
  p.x0 = get_number(j, "x0", p.x0);
  const double mode = get_number(j, "mode", 1.0);
  if (!(mode >= 1.0) || mode != std::floor(mode) || mode > 1e9) {
    throw InvalidArgument(fmt::format("field 'mode' must be a positive integer, got {}", mode));
  }
  p.mode = static_cast<unsigned>(mode);
  p.photons = get_number(j, "photons", p.photons);
  p.hbar = get_number(j, "hbar", p.hbar);
  p.c_light = get_number(j, "c", p.c_light);
  if (j.contains("potential")) {
    const json& v = j.at("potential");
    const std::string kind = v.value("kind", std::string("free"));
    if (kind == "harmonic") {
      p.potential = HarmonicPotential{get_number(v, "omega", 0.0),
                                      get_number(v, "x_eq", 0.0)};
    } else if (kind != "free") {
      throw InvalidArgument(fmt::format(
          "potential.kind '{}' is not one of free, harmonic", kind));
    }
  }
  p.validate();
  return p;
}

json to_json(const OptomechParams& p) {
  json j{{"mass", p.mass},       {"x0", p.x0},     {"mode", p.mode},
         {"photons", p.photons}, {"hbar", p.hbar}, {"c", p.c_light}};
  if (const auto* h = std::get_if<HarmonicPotential>(&p.potential)) {
    j["potential"] = {{"kind", "harmonic"}, {"omega", h->omega}, {"x_eq", h->x_eq}};
  } else {
    j["potential"] = {{"kind", "free"}};
  }
  return j;
}

RotatingFrameConfig rotating_frame_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("rotating_frame section must be an object");
  if (!j.contains("cavities") || !j.at("cavities").is_array() ||
      j.at("cavities").size() != 2) {
    throw InvalidArgument("rotating_frame.cavities must list exactly two cavities");
  }
  RotatingFrameConfig cfg;
  for (std::size_t k = 0; k < 2; ++k) {
    const json& c = j.at("cavities").at(k);
    cfg.cavities[k] = CavityLine{get_number(c, "omega0", 0.0),
                                 get_number(c, "G", 1.0),
                                 get_number(c, "Delta", -1.0)};
  }
  cfg.delta_over_g =
      get_number(j, "Delta_over_G", ratio_of(cfg.cavities[0]));
  return cfg;
}

json to_json(const RotatingFrameConfig& cfg) {
  json cav = json::array();
  for (const auto& c : cfg.cavities) {
    cav.push_back({{"omega0", c.omega0}, {"G", c.pull}, {"Delta", c.detuning}});
  }
  return {{"cavities", cav}, {"Delta_over_G", cfg.delta_over_g}};
}

}  // namespace tfrw
