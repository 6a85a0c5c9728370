#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>

namespace tfrw {

/// Four-point Lagrange stencil: value(u) = sum_k weights[k] * y[first + k].
/// `inside` is false when u falls outside [nodes.front(), nodes.back()], in
/// which case all weights are zero.
struct CubicStencil {
  std::size_t first = 0;
  std::array<double, 4> weights{};
  bool inside = false;
};

/// Builds the cubic stencil for sorted nodes (at least 4). Near the ends the
/// stencil is shifted inward rather than shrunk.
CubicStencil cubic_stencil(std::span<const double> nodes, double u);

std::complex<double> cubic_interpolate(std::span<const double> nodes,
                                       std::span<const std::complex<double>> y,
                                       double u);

/// Piecewise-linear interpolation; zero outside the node range.
double linear_interpolate(std::span<const double> nodes,
                          std::span<const double> y, double u);

}  // namespace tfrw
