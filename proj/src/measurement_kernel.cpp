#include "tfrw/measurement_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "tfrw/errors.hpp"
#include "tfrw/interpolation.hpp"

namespace tfrw {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Support {
  double lo;
  double hi;
};

// Compact support of p(w / scale), if p is tabulated.
std::optional<Support> support(const SpectralProfile& p, double scale) {
  if (const auto* t = std::get_if<Tabulated>(&p.kind())) {
    return Support{scale * t->omega.front(), scale * t->omega.back()};
  }
  return std::nullopt;
}

void add_cuts(const SpectralProfile& p, double scale, std::vector<double>& cuts,
              double& width) {
  for (const auto& f : p.features()) {
    const double c = scale * f.center;
    const double w = scale * f.width;
    cuts.insert(cuts.end(), {c - w, c, c + w});
    width = std::max(width, w);
  }
}

}  // namespace

std::complex<double> profile_overlap(const SpectralProfile& f, double f_scale,
                                     const SpectralProfile& g, double g_scale,
                                     const QuadOptions& opts) {
  auto integrand = [&](double w) {
    return std::conj(g(w / g_scale)) * f(w / f_scale);
  };
  std::vector<double> cuts;
  double width = 0.0;
  add_cuts(f, f_scale, cuts, width);
  add_cuts(g, g_scale, cuts, width);

  const auto sf = support(f, f_scale);
  const auto sg = support(g, g_scale);
  if (!sf && !sg) {
    return integrate_real_line(integrand, cuts, width, opts).value;
  }

  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& s : {sf, sg}) {
    if (s) {
      lo = std::max(lo, s->lo);
      hi = std::min(hi, s->hi);
    }
  }
  if (!(lo < hi)) return {};
  std::vector<double> inner{lo};
  for (double c : cuts) {
    if (c > lo && c < hi) inner.push_back(c);
  }
  inner.push_back(hi);
  std::sort(inner.begin(), inner.end());
  std::complex<double> total{};
  for (std::size_t i = 0; i + 1 < inner.size(); ++i) {
    total += integrate(integrand, inner[i], inner[i + 1], opts).value;
  }
  return total;
}

namespace {

std::complex<double> ipow(std::complex<double> z, unsigned k) {
  std::complex<double> out{1.0, 0.0};
  while (k > 0) {
    if (k & 1U) out *= z;
    z *= z;
    k >>= 1U;
  }
  return out;
}

}  // namespace

std::complex<double> q_numeric(const SpectralProfile& f,
                               const SpectralProfile& g, double r,
                               const QuadOptions& opts) {
  if (!(r > 0.0)) throw InvalidArgument("q: ratio must be positive");
  return profile_overlap(f, 1.0, g, r, opts) / std::sqrt(r);
}

std::complex<double> q_numeric_pair(const SpectralProfile& f,
                                    const SpectralProfile& g, double a,
                                    double c, const QuadOptions& opts) {
  if (!(a > 0.0) || !(c > 0.0)) {
    throw InvalidArgument("q: scale factors must be positive");
  }
  return profile_overlap(f, c, g, a, opts) / std::sqrt(a * c);
}

std::complex<double> q_lorentzian_closed(const LorentzianPair& p, double r) {
  if (!(p.linewidth_emit > 0.0) || !(p.linewidth_detect > 0.0)) {
    throw InvalidArgument("closed-form q needs positive linewidths");
  }
  if (!(r > 0.0)) throw InvalidArgument("q: ratio must be positive");
  using namespace std::complex_literals;
  const std::complex<double> denom =
      (0.5 * p.linewidth_emit + 1i * p.center_emit) +
      (0.5 * p.linewidth_detect - 1i * p.center_detect) * r;
  return 2.0 * std::numbers::pi * std::conj(p.gamma_emit) * p.gamma_detect *
         std::sqrt(r) / denom;
}

std::optional<LorentzianPair> lorentzian_pair(const SpectralProfile& f,
                                              const SpectralProfile& g) {
  const SpectralProfile lf = f.as_lorentzian_if_possible();
  const SpectralProfile lg = g.as_lorentzian_if_possible();
  const auto* a = std::get_if<Lorentzian>(&lf.kind());
  const auto* b = std::get_if<Lorentzian>(&lg.kind());
  if (!a || !b) return std::nullopt;
  return LorentzianPair{a->gamma,     b->gamma,  a->linewidth,
                        b->linewidth, a->center, b->center};
}

MeasurementKernel::MeasurementKernel(Backend backend, unsigned power)
    : backend_(std::move(backend)), power_(power) {
  if (power_ < 1) throw InvalidArgument("kernel power must be at least 1");
  if (const auto* t = std::get_if<TabulatedRatio>(&backend_)) {
    if (t->log_r.size() < 4 || t->log_r.size() != t->values.size()) {
      throw InvalidArgument("tabulated kernel needs >= 4 matching samples");
    }
  }
}

MeasurementKernel MeasurementKernel::from_profiles(const SpectralProfile& f,
                                                   const SpectralProfile& g) {
  return MeasurementKernel(Quadrature{f, g, default_kernel_quadrature()});
}

MeasurementKernel MeasurementKernel::closed_form(const LorentzianPair& p) {
  return MeasurementKernel(LorentzianClosed{p});
}

std::complex<double> MeasurementKernel::base(double r) const {
  return std::visit(
      overloaded{
          [r](const Quadrature& q) {
            return q_numeric(q.emit, q.detect, r, q.opts);
          },
          [r](const LorentzianClosed& c) {
            return q_lorentzian_closed(c.params, r);
          },
          [r](const TabulatedRatio& t) {
            if (!(r > 0.0)) throw InvalidArgument("q: ratio must be positive");
            const double u = std::log(r);
            // Allow round-off at the table ends.
            const double tol = 1e-12 * (t.log_r.back() - t.log_r.front());
            if (u < t.log_r.front() - tol || u > t.log_r.back() + tol) {
              throw InvalidArgument(fmt::format(
                  "ratio {} outside tabulated kernel range [{}, {}]", r,
                  std::exp(t.log_r.front()), std::exp(t.log_r.back())));
            }
            const double uc =
                std::clamp(u, t.log_r.front(), t.log_r.back());
            return cubic_interpolate(t.log_r, t.values, uc);
          }},
      backend_);
}

std::complex<double> MeasurementKernel::operator()(double r) const {
  return ipow(base(r), power_);
}

MeasurementKernel MeasurementKernel::tabulated(double r_min, double r_max,
                                               std::size_t n) const {
  if (!(r_min > 0.0) || !(r_min < r_max) || n < 4) {
    throw InvalidArgument("kernel table needs 0 < r_min < r_max and n >= 4");
  }
  TabulatedRatio t;
  t.log_r.resize(n);
  t.values.resize(n);
  const double lo = std::log(r_min);
  const double hi = std::log(r_max);
  for (std::size_t i = 0; i < n; ++i) {
    t.log_r[i] = lo + (hi - lo) * static_cast<double>(i) /
                          static_cast<double>(n - 1);
    t.values[i] = base(std::exp(t.log_r[i]));
  }
  return MeasurementKernel(std::move(t), power_);
}

MeasurementKernel kernel_power(const MeasurementKernel& k, unsigned times) {
  if (times < 1) throw InvalidArgument("kernel_power: times must be >= 1");
  return MeasurementKernel(k.backend(), k.power() * times);
}

PeakResult peak_ratio(const MeasurementKernel& k, double r_lo, double r_hi,
                      std::size_t scan_points) {
  if (!(r_lo > 0.0) || !(r_lo < r_hi)) {
    throw InvalidArgument("peak_ratio: need 0 < r_lo < r_hi");
  }
  if (scan_points < 3) scan_points = 3;
  const double lo = std::log(r_lo);
  const double hi = std::log(r_hi);
  auto at = [&](std::size_t i) {
    return lo + (hi - lo) * static_cast<double>(i) /
                    static_cast<double>(scan_points - 1);
  };
  std::vector<double> mag(scan_points);
  for (std::size_t i = 0; i < scan_points; ++i) {
    mag[i] = std::abs(k(std::exp(at(i))));
  }
  const double top = *std::max_element(mag.begin(), mag.end());

  // Interior local maxima above the numerical floor.
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < scan_points; ++i) {
    if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1] && mag[i] > 1e-6 * top) {
      maxima.push_back(i);
    }
  }
  if (maxima.size() > 1) {
    std::vector<std::pair<double, double>> brackets;
    for (std::size_t i : maxima) {
      brackets.emplace_back(std::exp(at(i - 1)), std::exp(at(i + 1)));
    }
    throw MultimodalError(
        fmt::format("|q(r)| has {} local maxima on [{}, {}]", maxima.size(),
                    r_lo, r_hi),
        std::move(brackets));
  }

  std::size_t imax = static_cast<std::size_t>(
      std::max_element(mag.begin(), mag.end()) - mag.begin());
  double a = at(imax == 0 ? 0 : imax - 1);
  double b = at(std::min(imax + 1, scan_points - 1));

  auto value = [&](double u) { return std::abs(k(std::exp(u))); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = value(c);
  double fd = value(d);
  while (b - a > 1e-10) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = value(d);
    }
  }
  const double u_star = 0.5 * (a + b);
  return PeakResult{std::exp(u_star), value(u_star)};
}

double log_fwhm(const MeasurementKernel& k, double r_lo, double r_hi,
                std::size_t n) {
  if (!(r_lo > 0.0) || !(r_lo < r_hi) || n < 3) {
    throw InvalidArgument("log_fwhm: need 0 < r_lo < r_hi and n >= 3");
  }
  const double lo = std::log(r_lo);
  const double hi = std::log(r_hi);
  std::vector<double> u(n);
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    mag[i] = std::abs(k(std::exp(u[i])));
  }
  const auto imax = static_cast<std::size_t>(
      std::max_element(mag.begin(), mag.end()) - mag.begin());
  const double half = 0.5 * mag[imax];

  std::size_t l = imax;
  while (l > 0 && mag[l - 1] >= half) --l;
  std::size_t r = imax;
  while (r + 1 < n && mag[r + 1] >= half) ++r;
  if (l == 0 || r + 1 == n) {
    throw InvalidArgument("log_fwhm: half maximum not reached inside range");
  }
  auto cross = [&](std::size_t below, std::size_t above) {
    const double t = (half - mag[below]) / (mag[above] - mag[below]);
    return u[below] + t * (u[above] - u[below]);
  };
  return cross(r + 1, r) - cross(l - 1, l);
}

RatioTable::RatioTable(const MeasurementKernel& k, const ScaleGrid& grid)
    : by_offset_(grid.spacing() == Spacing::LogUniform), n_(grid.size()) {
  if (by_offset_) {
    const double step = grid.log_step();
    offset_values_.resize(2 * n_ - 1);
    for (std::size_t m = 0; m < offset_values_.size(); ++m) {
      const double d =
          static_cast<double>(m) - static_cast<double>(n_ - 1);
      offset_values_[m] = k(std::exp(d * step));
    }
    return;
  }
  const double r_min = grid.front() / grid.back();
  const double r_max = grid.back() / grid.front();
  const MeasurementKernel table =
      MeasurementKernel(k.backend(), 1)
          .tabulated(r_min, r_max, std::max<std::size_t>(4 * n_ + 1, 2049));
  const MeasurementKernel powered(table.backend(), k.power());
  dense_.resize(n_ * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      dense_[i * n_ + j] = powered(grid[i] / grid[j]);
    }
  }
}

std::complex<double> RatioTable::operator()(std::size_t i,
                                            std::size_t j) const {
  if (by_offset_) return offset_values_[i + (n_ - 1) - j];
  return dense_[i * n_ + j];
}

}  // namespace tfrw
