#include "tfrw/interpolation.hpp"

#include <algorithm>

#include "tfrw/errors.hpp"

namespace tfrw {

CubicStencil cubic_stencil(std::span<const double> nodes, double u) {
  const std::size_t n = nodes.size();
  if (n < 4) throw InvalidArgument("cubic_stencil: need at least 4 nodes");
  CubicStencil st;
  if (!(u >= nodes.front() && u <= nodes.back())) return st;

  // Interval [nodes[j], nodes[j+1]] containing u.
  auto it = std::upper_bound(nodes.begin(), nodes.end(), u);
  std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  j = j == 0 ? 0 : j - 1;
  if (j >= n - 1) j = n - 2;

  std::size_t first = j >= 1 ? j - 1 : 0;
  if (first + 4 > n) first = n - 4;

  st.first = first;
  st.inside = true;
  for (std::size_t k = 0; k < 4; ++k) {
    double w = 1.0;
    const double xk = nodes[first + k];
    for (std::size_t m = 0; m < 4; ++m) {
      if (m == k) continue;
      const double xm = nodes[first + m];
      w *= (u - xm) / (xk - xm);
    }
    st.weights[k] = w;
  }
  return st;
}

std::complex<double> cubic_interpolate(std::span<const double> nodes,
                                       std::span<const std::complex<double>> y,
                                       double u) {
  const CubicStencil st = cubic_stencil(nodes, u);
  if (!st.inside) return {};
  std::complex<double> v{};
  for (std::size_t k = 0; k < 4; ++k) v += st.weights[k] * y[st.first + k];
  return v;
}

double linear_interpolate(std::span<const double> nodes,
                          std::span<const double> y, double u) {
  if (nodes.empty() || u < nodes.front() || u > nodes.back()) return 0.0;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), u);
  std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  if (j >= nodes.size()) return y.back();
  if (j == 0) return y.front();
  const double t = (u - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
  return (1.0 - t) * y[j - 1] + t * y[j];
}

}  // namespace tfrw
