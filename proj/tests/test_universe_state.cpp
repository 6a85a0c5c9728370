#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "support.hpp"
#include "tfrw/errors.hpp"
#include "tfrw/universe_state.hpp"

using namespace tfrw;
using tfrw_test::cplx;

TEST_CASE("make_log_grid") {
  const ScaleGrid g = make_log_grid(1.0, 4.0, 3);
  CHECK(g.size() == 3);
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g[2] == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(g.spacing() == Spacing::LogUniform);

  const ScaleGrid h = make_log_grid(0.1, 10.0, 201);
  CHECK(std::abs(h[100] - 1.0) < 1e-12);
  CHECK(h.front() == 0.1);
  CHECK(h.back() == 10.0);

  CHECK_THROWS_AS(make_log_grid(2.0, 2.0, 5), InvalidArgument);
  CHECK_THROWS_AS(make_log_grid(0.0, 2.0, 5), InvalidArgument);
  CHECK_THROWS_AS(make_log_grid(-1.0, 2.0, 5), InvalidArgument);
  CHECK_THROWS_AS(make_log_grid(1.0, 2.0, 2), InvalidArgument);
}

TEST_CASE("explicit grids must be positive and increasing") {
  CHECK_THROWS_AS(ScaleGrid::from_points({0.0, 1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(ScaleGrid::from_points({1.0, 1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(ScaleGrid::from_points({1.0, 2.0}), InvalidArgument);
  const ScaleGrid g = ScaleGrid::from_points({0.5, 1.0, 3.0});
  const auto w = g.weights();
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(1.25));
  CHECK(w[2] == doctest::Approx(1.0));
}

TEST_CASE("gaussian_packet") {
  const ScaleGrid g = make_log_grid(0.1, 10.0, 2001);
  const auto psi = gaussian_packet(g, 1.0, 0.1);
  CHECK(std::abs(psi.norm_squared() - 1.0) < 1e-12);
  const Moments m = moments(psi);
  const double step = g[1001] - g[1000];
  CHECK(std::abs(m.mean_a - 1.0) < step);
  CHECK(std::abs(m.std_a - 0.1) < 0.002);
  CHECK(std::abs(m.fwhm_a - 2.0 * std::sqrt(2.0 * std::log(2.0)) * 0.1) < 0.03 * 0.23548);
  CHECK_FALSE(m.multimodal);
  CHECK_THROWS_AS(gaussian_packet(g, 50.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(gaussian_packet(g, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("normalize") {
  const ScaleGrid g = ScaleGrid::uniform(1.0, 3.0, 201);
  std::vector<cplx> amps(g.size(), cplx{std::sqrt(2.0), 0.0});
  // integral of 2 over [1, 3] is 4
  const auto n = normalize(UniverseWavefunction(g, amps));
  CHECK(n.norm_before == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(std::abs(n.state.norm_squared() - 1.0) < 1e-14);

  const auto again = normalize(n.state);
  CHECK(std::abs(again.norm_before - 1.0) < 1e-14);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(again.state[i] - n.state[i]) < 1e-14);
  }

  std::vector<cplx> zero(g.size());
  CHECK_THROWS_AS(normalize(UniverseWavefunction(g, zero)), DegenerateState);
  CHECK_THROWS_AS(UniverseWavefunction(g, std::vector<cplx>(3)), InvalidArgument);
}

TEST_CASE("moments of symmetric and bimodal densities") {
  const ScaleGrid g = ScaleGrid::uniform(0.5, 1.5, 1001);
  const auto psi = gaussian_packet(g, 1.0, 0.05);
  const Moments m = moments(psi);
  CHECK(std::abs(m.mean_a - 1.0) < 1e-3);
  CHECK(std::abs(m.half_max_center - 1.0) < 1e-3);

  std::vector<cplx> two(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    two[i] = std::exp(-std::pow(g[i] - 0.8, 2) / 0.004) +
             std::exp(-std::pow(g[i] - 1.2, 2) / 0.004);
  }
  const Moments b = moments(normalize(UniverseWavefunction(g, two)).state);
  CHECK(b.multimodal);
  // widest bracketing interval spans both peaks
  CHECK(b.fwhm_a > 0.4);
  CHECK(std::abs(b.half_max_center - 1.0) < 1e-3);
}

TEST_CASE("flat-topped density reports the midpoint of the half-max interval") {
  const ScaleGrid g = ScaleGrid::uniform(1.0, 2.0, 101);
  std::vector<cplx> amps(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    amps[i] = (g[i] >= 1.2 && g[i] <= 1.6) ? 1.0 : 0.0;
  }
  const Moments m = moments(normalize(UniverseWavefunction(g, amps)).state);
  CHECK(m.half_max_center == doctest::Approx(1.4).epsilon(1e-3));
}

TEST_CASE("overlap") {
  const ScaleGrid g = make_log_grid(0.1, 10.0, 2001);
  const auto a = gaussian_packet(g, 1.0, 0.1);
  CHECK(std::abs(overlap(a, a) - cplx{1.0, 0.0}) < 1e-12);

  std::vector<cplx> ia(a.amplitudes().begin(), a.amplitudes().end());
  for (auto& v : ia) v *= cplx{0.0, 1.0};
  CHECK(std::abs(overlap(a, UniverseWavefunction(g, ia)) - cplx{0.0, 1.0}) < 1e-12);

  const auto far = gaussian_packet(g, 2.0, 0.1);
  // two Gaussians of width sigma a distance d apart overlap as exp(-d^2 / (8 sigma^2))
  CHECK(std::abs(std::abs(overlap(a, far)) - std::exp(-12.5)) < 1e-3 * std::exp(-12.5));

  const auto other = gaussian_packet(make_log_grid(0.1, 10.0, 101), 1.0, 0.1);
  CHECK_THROWS_AS(overlap(a, other), InvalidArgument);
  CHECK(l2_distance(a, a) == 0.0);
}

TEST_CASE("second-order convergence of moments under refinement") {
  auto stdev = [](std::size_t n) {
    return moments(gaussian_packet(ScaleGrid::uniform(0.5, 1.5, n), 1.0, 0.1)).std_a;
  };
  const double e1 = std::abs(stdev(41) - stdev(1601));
  const double e2 = std::abs(stdev(81) - stdev(1601));
  // doubling n cuts the error by about four
  CHECK(e2 < e1 / 3.0);
}

TEST_CASE("CSV and JSON round trip") {
  const ScaleGrid g = make_log_grid(0.5, 2.0, 11);
  const auto psi = gaussian_packet(g, 1.0, 0.2);
  std::ostringstream os;
  write_csv(os, psi);
  const std::string csv = os.str();
  CHECK(csv.rfind("a [dimensionless],re_h [a^-1/2],im_h [a^-1/2]\n", 0) == 0);

  const auto back = wavefunction_from_json(to_json(psi));
  CHECK(back.grid().spacing() == Spacing::LogUniform);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(back[i] == psi[i]);
    CHECK(back.grid()[i] == doctest::Approx(g[i]).epsilon(1e-15));
  }
}
