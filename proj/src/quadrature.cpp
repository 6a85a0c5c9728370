#include "tfrw/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <fmt/core.h>

#include "tfrw/errors.hpp"

namespace tfrw {
namespace {

// Kronrod abscissae on [0, 1); odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583938627515, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  int piece;
  double lo;
  double hi;
  std::complex<double> value;
  double error;
};

struct ByError {
  bool operator()(const Segment& a, const Segment& b) const {
    return a.error < b.error;
  }
};

// A piece of the integration domain expressed in a local variable t, with
// x = map(t) and dx = jac(t) dt.
struct Piece {
  std::function<double(double)> map;
  std::function<double(double)> jac;
  double lo;
  double hi;
};

Segment gk15(const ComplexIntegrand& f, const Piece& p, int piece, double lo,
             double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);

  auto eval = [&](double t) { return f(p.map(t)) * p.jac(t); };

  const std::complex<double> fc = eval(center);
  std::complex<double> res_k = fc * kWgk[7];
  std::complex<double> res_g = fc * kWg[3];
  double res_abs = std::abs(fc) * kWgk[7];

  std::array<std::complex<double>, 7> f1{};
  std::array<std::complex<double>, 7> f2{};
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = eval(center - dx);
    f2[j] = eval(center + dx);
    const std::complex<double> sum = f1[j] + f2[j];
    res_k += kWgk[j] * sum;
    res_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) res_g += kWg[j / 2] * sum;
  }

  const std::complex<double> mean = res_k * 0.5;
  double res_asc = kWgk[7] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 7; ++j) {
    res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }

  res_k *= half;
  res_abs *= std::abs(half);
  res_asc *= std::abs(half);
  double err = std::abs((res_k - res_g * half));
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * res_abs, err);
  }
  return Segment{piece, lo, hi, res_k, err};
}

QuadResult adapt(const ComplexIntegrand& f, const std::vector<Piece>& pieces,
                 const QuadOptions& opts) {
  std::priority_queue<Segment, std::vector<Segment>, ByError> heap;
  std::complex<double> total{};
  double total_err = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Segment s = gk15(f, pieces[i], static_cast<int>(i), pieces[i].lo,
                     pieces[i].hi);
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }
  std::size_t evaluations = 15 * pieces.size();

  auto tolerance = [&] {
    return std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };

  while (true) {
    if (!std::isfinite(total.real()) || !std::isfinite(total.imag()) ||
        !std::isfinite(total_err)) {
      throw QuadratureFailure("quadrature produced a non-finite value",
                              std::numeric_limits<double>::infinity());
    }
    if (total_err <= tolerance()) break;
    if (heap.size() >= opts.max_segments) {
      const double achieved =
          std::abs(total) > 0.0 ? total_err / std::abs(total) : total_err;
      throw QuadratureFailure(
          fmt::format("quadrature did not converge: {} segments, achieved "
                      "relative error {:.3e} (requested {:.3e})",
                      heap.size(), achieved, opts.rel_tol),
          achieved);
    }
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // Segment cannot be split further in floating point.
      heap.push(worst);
      const double achieved =
          std::abs(total) > 0.0 ? total_err / std::abs(total) : total_err;
      throw QuadratureFailure(
          fmt::format("quadrature hit floating-point resolution, achieved "
                      "relative error {:.3e}",
                      achieved),
          achieved);
    }
    const Piece& p = pieces[static_cast<std::size_t>(worst.piece)];
    Segment left = gk15(f, p, worst.piece, worst.lo, mid);
    Segment right = gk15(f, p, worst.piece, mid, worst.hi);
    evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from the heap to shed accumulated cancellation in the running sum.
  QuadResult out;
  out.segments = heap.size();
  out.evaluations = evaluations;
  std::complex<double> sum{};
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = sum;
  out.error = err;
  return out;
}

}  // namespace

QuadResult integrate(const ComplexIntegrand& f, double lo, double hi,
                     const QuadOptions& opts) {
  if (lo == hi) return QuadResult{};
  if (hi < lo) {
    QuadResult r = integrate(f, hi, lo, opts);
    r.value = -r.value;
    return r;
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("integrate: limits must be finite");
  }
  std::vector<Piece> pieces{
      Piece{[](double t) { return t; }, [](double) { return 1.0; }, lo, hi}};
  return adapt(f, pieces, opts);
}

QuadResult integrate_real_line(const ComplexIntegrand& f,
                               std::span<const double> breakpoints,
                               double tail_scale, const QuadOptions& opts) {
  if (breakpoints.empty()) {
    throw InvalidArgument("integrate_real_line: need at least one breakpoint");
  }
  if (!(tail_scale > 0.0)) {
    throw InvalidArgument("integrate_real_line: tail scale must be positive");
  }
  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double L = tail_scale;
  const double left = cuts.front();
  const double right = cuts.back();
  std::vector<Piece> pieces;
  pieces.push_back(Piece{[=](double t) { return left - L * (1.0 - t) / t; },
                         [=](double t) { return L / (t * t); }, 0.0, 1.0});
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    pieces.push_back(Piece{[](double t) { return t; },
                           [](double) { return 1.0; }, cuts[i], cuts[i + 1]});
  }
  pieces.push_back(Piece{[=](double t) { return right + L * (1.0 - t) / t; },
                         [=](double t) { return L / (t * t); }, 0.0, 1.0});
  return adapt(f, pieces, opts);
}

}  // namespace tfrw
