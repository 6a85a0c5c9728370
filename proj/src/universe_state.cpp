#include "tfrw/universe_state.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "tfrw/csv.hpp"
#include "tfrw/errors.hpp"

namespace tfrw {

const char* to_string(Spacing s) {
  switch (s) {
    case Spacing::LogUniform:
      return "log";
    case Spacing::Uniform:
      return "uniform";
    case Spacing::Explicit:
      return "explicit";
  }
  return "explicit";
}

std::vector<double> trapezoid_weights(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = 0.5 * (x[i + 1] - x[i]);
    w[i] += h;
    w[i + 1] += h;
  }
  return w;
}

ScaleGrid::ScaleGrid(std::vector<double> points, Spacing spacing)
    : points_(std::move(points)), spacing_(spacing) {
  if (points_.size() < 3) {
    throw InvalidArgument(
        fmt::format("scale grid needs at least 3 points, got {}",
                    points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i] > 0.0) || !std::isfinite(points_[i])) {
      throw InvalidArgument(fmt::format(
          "scale factor must be strictly positive and finite (point {} = {})",
          i, points_[i]));
    }
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw InvalidArgument(
          fmt::format("scale grid must be strictly increasing at index {}", i));
    }
  }
  logs_.resize(points_.size());
  std::transform(points_.begin(), points_.end(), logs_.begin(),
                 [](double a) { return std::log(a); });
  weights_ = trapezoid_weights(points_);
}

ScaleGrid ScaleGrid::log_uniform(double a_min, double a_max, std::size_t n) {
  if (!(a_min > 0.0) || !(a_max > 0.0)) {
    throw InvalidArgument("log grid bounds must be strictly positive");
  }
  if (!(a_min < a_max)) throw InvalidArgument("log grid needs a_min < a_max");
  if (n < 3) throw InvalidArgument("log grid needs at least 3 points");
  const double lo = std::log(a_min);
  const double hi = std::log(a_max);
  std::vector<double> pts(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = std::exp(lo + static_cast<double>(i) * step);
  }
  pts.front() = a_min;
  pts.back() = a_max;
  ScaleGrid g(std::move(pts), Spacing::LogUniform);
  // Exact uniform log coordinates keep ratio lookups index-aligned.
  for (std::size_t i = 0; i < n; ++i) {
    g.logs_[i] = lo + static_cast<double>(i) * step;
  }
  g.logs_.back() = hi;
  return g;
}

ScaleGrid ScaleGrid::uniform(double a_min, double a_max, std::size_t n) {
  if (!(a_min > 0.0)) {
    throw InvalidArgument("uniform grid lower bound must be strictly positive");
  }
  if (!(a_min < a_max)) throw InvalidArgument("uniform grid needs a_min < a_max");
  if (n < 3) throw InvalidArgument("uniform grid needs at least 3 points");
  std::vector<double> pts(n);
  const double step = (a_max - a_min) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = a_min + static_cast<double>(i) * step;
  }
  pts.back() = a_max;
  return ScaleGrid(std::move(pts), Spacing::Uniform);
}

ScaleGrid ScaleGrid::from_points(std::vector<double> points) {
  return ScaleGrid(std::move(points), Spacing::Explicit);
}

double ScaleGrid::log_step() const {
  return (logs_.back() - logs_.front()) / static_cast<double>(size() - 1);
}

ScaleGrid make_log_grid(double a_min, double a_max, std::size_t n) {
  return ScaleGrid::log_uniform(a_min, a_max, n);
}

UniverseWavefunction::UniverseWavefunction(
    ScaleGrid grid, std::vector<std::complex<double>> amplitudes)
    : grid_(std::move(grid)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != grid_.size()) {
    throw InvalidArgument(
        fmt::format("wavefunction has {} amplitudes for {} grid points",
                    amplitudes_.size(), grid_.size()));
  }
}

double UniverseWavefunction::norm_squared() const {
  const auto w = grid_.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    s += w[i] * std::norm(amplitudes_[i]);
  }
  return s;
}

std::vector<double> UniverseWavefunction::density() const {
  std::vector<double> rho(amplitudes_.size());
  std::transform(amplitudes_.begin(), amplitudes_.end(), rho.begin(),
                 [](std::complex<double> h) { return std::norm(h); });
  return rho;
}

Normalized normalize(const UniverseWavefunction& psi) {
  const double n2 = psi.norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw DegenerateState(
        "wavefunction has zero norm: the post-selected branch is empty");
  }
  const double scale = 1.0 / std::sqrt(n2);
  std::vector<std::complex<double>> amps(psi.amplitudes().begin(),
                                         psi.amplitudes().end());
  for (auto& h : amps) h *= scale;
  return Normalized{UniverseWavefunction(psi.grid(), std::move(amps)), n2};
}

UniverseWavefunction gaussian_packet(const ScaleGrid& grid, double a0,
                                     double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("packet width must be positive");
  if (!grid.contains(a0)) {
    throw InvalidArgument(fmt::format(
        "packet center {} outside grid [{}, {}]", a0, grid.front(),
        grid.back()));
  }
  std::vector<std::complex<double>> amps(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = grid[i] - a0;
    amps[i] = std::exp(-d * d / (4.0 * sigma * sigma));
  }
  return normalize(UniverseWavefunction(grid, std::move(amps))).state;
}

Moments moments(const UniverseWavefunction& psi) {
  const ScaleGrid& g = psi.grid();
  const auto w = g.weights();
  const std::vector<double> rho = psi.density();

  double mass = 0.0;
  double m1 = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    mass += w[i] * rho[i];
    m1 += w[i] * rho[i] * g[i];
  }
  if (!(mass > 0.0)) throw DegenerateState("moments of a zero-norm state");
  Moments m;
  m.mean_a = m1 / mass;
  double var = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double d = g[i] - m.mean_a;
    var += w[i] * rho[i] * d * d;
  }
  m.std_a = std::sqrt(var / mass);

  const auto peak = std::max_element(rho.begin(), rho.end());
  m.peak_a = g[static_cast<std::size_t>(peak - rho.begin())];
  const double half = 0.5 * *peak;

  // Half-maximum crossings, linearly interpolated; a density still above
  // half maximum at a grid edge crosses at that edge.
  std::vector<double> crossings;
  if (rho.front() >= half) crossings.push_back(g.front());
  for (std::size_t i = 0; i + 1 < rho.size(); ++i) {
    const bool below_i = rho[i] < half;
    const bool below_j = rho[i + 1] < half;
    if (below_i != below_j) {
      const double t = (half - rho[i]) / (rho[i + 1] - rho[i]);
      crossings.push_back(g[i] + t * (g[i + 1] - g[i]));
    }
  }
  if (rho.back() >= half) crossings.push_back(g.back());

  m.multimodal = crossings.size() > 2;
  m.fwhm_a = crossings.back() - crossings.front();
  m.half_max_center = 0.5 * (crossings.back() + crossings.front());
  return m;
}

std::complex<double> overlap(const UniverseWavefunction& psi1,
                             const UniverseWavefunction& psi2) {
  if (!(psi1.grid() == psi2.grid())) {
    throw InvalidArgument("overlap: wavefunctions live on different grids");
  }
  const auto w = psi1.grid().weights();
  std::complex<double> s{};
  for (std::size_t i = 0; i < psi1.size(); ++i) {
    s += w[i] * std::conj(psi1[i]) * psi2[i];
  }
  return s;
}

double l2_distance(const UniverseWavefunction& psi1,
                   const UniverseWavefunction& psi2) {
  if (!(psi1.grid() == psi2.grid())) {
    throw InvalidArgument("l2_distance: wavefunctions live on different grids");
  }
  const auto w = psi1.grid().weights();
  double s = 0.0;
  for (std::size_t i = 0; i < psi1.size(); ++i) {
    s += w[i] * std::norm(psi1[i] - psi2[i]);
  }
  return std::sqrt(s);
}

void write_csv(std::ostream& os, const UniverseWavefunction& psi) {
  csv::write_header(os, "a [dimensionless],re_h [a^-1/2],im_h [a^-1/2]");
  for (std::size_t i = 0; i < psi.size(); ++i) {
    csv::write_row(os, {psi.grid()[i], psi[i].real(), psi[i].imag()});
  }
}

nlohmann::json to_json(const ScaleGrid& grid) {
  return nlohmann::json{
      {"spacing", to_string(grid.spacing())},
      {"points", std::vector<double>(grid.points().begin(),
                                     grid.points().end())}};
}

nlohmann::json to_json(const UniverseWavefunction& psi) {
  std::vector<double> re(psi.size());
  std::vector<double> im(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    re[i] = psi[i].real();
    im[i] = psi[i].imag();
  }
  return nlohmann::json{{"grid", to_json(psi.grid())}, {"re", re}, {"im", im}};
}

UniverseWavefunction wavefunction_from_json(const nlohmann::json& j) {
  try {
    auto pts = j.at("grid").at("points").get<std::vector<double>>();
    const auto spacing = j.at("grid").value("spacing", std::string("explicit"));
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != im.size()) {
      throw InvalidArgument("wavefunction JSON: re and im lengths differ");
    }
    ScaleGrid grid = ScaleGrid::from_points(pts);
    if (spacing == "log" && pts.size() >= 3) {
      ScaleGrid log = ScaleGrid::log_uniform(pts.front(), pts.back(),
                                             pts.size());
      // Accept the log tag only when the points really are log-uniform.
      bool same = true;
      for (std::size_t i = 0; i < pts.size() && same; ++i) {
        same = std::abs(log[i] - pts[i]) <= 1e-12 * pts[i];
      }
      if (same) grid = std::move(log);
    }
    std::vector<std::complex<double>> amps(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) amps[i] = {re[i], im[i]};
    return UniverseWavefunction(std::move(grid), std::move(amps));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(fmt::format("wavefunction JSON: {}", e.what()));
  }
}

}  // namespace tfrw
