#include "tfrw/spectral_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "tfrw/errors.hpp"
#include "tfrw/interpolation.hpp"
#include "tfrw/quadrature.hpp"

namespace tfrw {
namespace {

constexpr std::complex<double> kI{0.0, 1.0};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Lorentzian near_delta_lorentzian(const NearDelta& d) {
  return Lorentzian{std::sqrt(d.epsilon / (2.0 * std::numbers::pi)),
                    d.epsilon, d.center};
}

std::complex<double> eval_lorentzian(const Lorentzian& l, double w) {
  return kI * std::conj(l.gamma) /
         std::complex<double>(0.5 * l.linewidth, -(w - l.center));
}

void validate(const SpectralProfile::Kind& kind) {
  std::visit(
      overloaded{
          [](const Lorentzian& l) {
            if (!(l.linewidth > 0.0)) {
              throw InvalidArgument("Lorentzian linewidth must be positive");
            }
          },
          [](const GaussianProfile& g) {
            if (!(g.sigma > 0.0)) {
              throw InvalidArgument("Gaussian profile sigma must be positive");
            }
          },
          [](const Tabulated& t) {
            if (t.omega.size() != t.values.size()) {
              throw InvalidArgument("tabulated profile: size mismatch");
            }
            if (t.omega.size() < 2) {
              throw InvalidArgument("tabulated profile needs two samples");
            }
            for (std::size_t i = 1; i < t.omega.size(); ++i) {
              if (!(t.omega[i] > t.omega[i - 1])) {
                throw InvalidArgument(
                    "tabulated profile frequencies must be strictly sorted");
              }
            }
          },
          [](const NearDelta& d) {
            if (!(d.epsilon > 0.0)) {
              throw InvalidArgument("near-delta epsilon must be positive");
            }
          }},
      kind);
}

std::complex<double> json_complex(const nlohmann::json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw InvalidArgument("complex value must be a number or [re, im]");
}

}  // namespace

SpectralProfile::SpectralProfile(Kind kind) : kind_(std::move(kind)) {
  validate(kind_);
}

SpectralProfile SpectralProfile::lorentzian(std::complex<double> gamma,
                                            double linewidth, double center) {
  return SpectralProfile(Lorentzian{gamma, linewidth, center});
}

SpectralProfile SpectralProfile::normalized_lorentzian(double linewidth,
                                                       double center) {
  if (!(linewidth > 0.0)) {
    throw InvalidArgument("Lorentzian linewidth must be positive");
  }
  return lorentzian(std::sqrt(linewidth / (2.0 * std::numbers::pi)), linewidth,
                    center);
}

SpectralProfile SpectralProfile::gaussian(std::complex<double> amplitude,
                                          double sigma, double center) {
  return SpectralProfile(GaussianProfile{amplitude, sigma, center});
}

SpectralProfile SpectralProfile::tabulated(
    std::vector<double> omega, std::vector<std::complex<double>> values) {
  return SpectralProfile(Tabulated{std::move(omega), std::move(values)});
}

SpectralProfile SpectralProfile::near_delta(double center, double epsilon) {
  return SpectralProfile(NearDelta{center, epsilon});
}

std::complex<double> SpectralProfile::operator()(double w) const {
  return std::visit(
      overloaded{
          [w](const Lorentzian& l) { return eval_lorentzian(l, w); },
          [w](const GaussianProfile& g) {
            const double d = w - g.center;
            return g.amplitude * std::exp(-d * d / (4.0 * g.sigma * g.sigma));
          },
          [w](const Tabulated& t) -> std::complex<double> {
            if (w < t.omega.front() || w > t.omega.back()) return {};
            auto it = std::upper_bound(t.omega.begin(), t.omega.end(), w);
            auto j = static_cast<std::size_t>(it - t.omega.begin());
            if (j >= t.omega.size()) return t.values.back();
            const double u =
                (w - t.omega[j - 1]) / (t.omega[j] - t.omega[j - 1]);
            return (1.0 - u) * t.values[j - 1] + u * t.values[j];
          },
          [w](const NearDelta& d) {
            return eval_lorentzian(near_delta_lorentzian(d), w);
          }},
      kind_);
}

std::vector<SpectralFeature> SpectralProfile::features() const {
  return std::visit(
      overloaded{
          [](const Lorentzian& l) {
            return std::vector<SpectralFeature>{{l.center, l.linewidth}};
          },
          [](const GaussianProfile& g) {
            return std::vector<SpectralFeature>{{g.center, g.sigma}};
          },
          [](const Tabulated& t) {
            const double span = t.omega.back() - t.omega.front();
            return std::vector<SpectralFeature>{{t.omega.front(), span},
                                                {t.omega.back(), span}};
          },
          [](const NearDelta& d) {
            return std::vector<SpectralFeature>{{d.center, d.epsilon}};
          }},
      kind_);
}

SpectralProfile SpectralProfile::scaled(std::complex<double> factor) const {
  return std::visit(
      overloaded{
          [&](const Lorentzian& l) {
            // p is linear in conj(gamma).
            return lorentzian(l.gamma * std::conj(factor), l.linewidth,
                              l.center);
          },
          [&](const GaussianProfile& g) {
            return gaussian(g.amplitude * factor, g.sigma, g.center);
          },
          [&](const Tabulated& t) {
            auto v = t.values;
            for (auto& x : v) x *= factor;
            return tabulated(t.omega, std::move(v));
          },
          [&](const NearDelta& d) {
            const Lorentzian l = near_delta_lorentzian(d);
            return lorentzian(l.gamma * std::conj(factor), l.linewidth,
                              l.center);
          }},
      kind_);
}

SpectralProfile SpectralProfile::as_lorentzian_if_possible() const {
  if (const auto* d = std::get_if<NearDelta>(&kind_)) {
    return SpectralProfile(near_delta_lorentzian(*d));
  }
  return *this;
}

std::complex<double> evaluate(const SpectralProfile& p, double omega) {
  return p(omega);
}

double l2_norm(const SpectralProfile& p) {
  auto integrand = [&p](double w) -> std::complex<double> {
    return std::norm(p(w));
  };
  QuadOptions opts;
  opts.rel_tol = 1e-12;
  if (const auto* t = std::get_if<Tabulated>(&p.kind())) {
    // Integrate node to node: the interpolant is smooth between samples.
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < t->omega.size(); ++i) {
      total += integrate(integrand, t->omega[i], t->omega[i + 1], opts)
                   .value.real();
    }
    if (!std::isfinite(total)) {
      throw QuadratureFailure("tabulated profile norm diverges",
                              std::numeric_limits<double>::infinity());
    }
    return std::sqrt(total);
  }
  std::vector<double> cuts;
  double scale = 0.0;
  for (const auto& f : p.features()) {
    cuts.push_back(f.center - f.width);
    cuts.push_back(f.center);
    cuts.push_back(f.center + f.width);
    scale = std::max(scale, f.width);
  }
  return std::sqrt(integrate_real_line(integrand, cuts, scale, opts)
                       .value.real());
}

SpectralProfile matched_profile(const SpectralProfile& f, double s) {
  if (!(s > 0.0)) throw InvalidArgument("matched_profile: s must be positive");
  const double root = std::sqrt(s);
  return std::visit(
      overloaded{
          [&](const Lorentzian& l) {
            return SpectralProfile::lorentzian(l.gamma / root, l.linewidth / s,
                                               l.center / s);
          },
          [&](const GaussianProfile& g) {
            return SpectralProfile::gaussian(g.amplitude * root, g.sigma / s,
                                             g.center / s);
          },
          [&](const Tabulated& t) {
            std::vector<double> w(t.omega.size());
            std::vector<std::complex<double>> v(t.values.size());
            for (std::size_t i = 0; i < w.size(); ++i) {
              w[i] = t.omega[i] / s;
              v[i] = root * t.values[i];
            }
            return SpectralProfile::tabulated(std::move(w), std::move(v));
          },
          [&](const NearDelta& d) {
            return SpectralProfile::near_delta(d.center / s, d.epsilon / s);
          }},
      f.kind());
}

SpectralProfile profile_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "lorentzian") {
      const double linewidth = j.at("Gamma").get<double>();
      const double center = j.at("omega_c").get<double>();
      if (j.contains("gamma")) {
        return SpectralProfile::lorentzian(json_complex(j.at("gamma")),
                                           linewidth, center);
      }
      return SpectralProfile::normalized_lorentzian(linewidth, center);
    }
    if (kind == "gaussian") {
      std::complex<double> amp{1.0, 0.0};
      if (j.contains("amp")) amp = json_complex(j.at("amp"));
      return SpectralProfile::gaussian(amp, j.at("sigma").get<double>(),
                                       j.at("omega_c").get<double>());
    }
    if (kind == "tabulated") {
      auto w = j.at("omega").get<std::vector<double>>();
      auto re = j.at("re").get<std::vector<double>>();
      std::vector<double> im(re.size(), 0.0);
      if (j.contains("im")) im = j.at("im").get<std::vector<double>>();
      if (re.size() != im.size()) {
        throw InvalidArgument("tabulated profile: re/im length mismatch");
      }
      std::vector<std::complex<double>> v(re.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = {re[i], im[i]};
      return SpectralProfile::tabulated(std::move(w), std::move(v));
    }
    if (kind == "near_delta") {
      return SpectralProfile::near_delta(j.at("omega_c").get<double>(),
                                         j.at("epsilon").get<double>());
    }
    throw InvalidArgument(fmt::format("unknown profile kind '{}'", kind));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(fmt::format("profile: {}", e.what()));
  }
}

nlohmann::json to_json(const SpectralProfile& p) {
  auto cplx = [](std::complex<double> z) {
    return nlohmann::json::array({z.real(), z.imag()});
  };
  return std::visit(
      overloaded{
          [&](const Lorentzian& l) {
            return nlohmann::json{{"kind", "lorentzian"},
                                  {"gamma", cplx(l.gamma)},
                                  {"Gamma", l.linewidth},
                                  {"omega_c", l.center}};
          },
          [&](const GaussianProfile& g) {
            return nlohmann::json{{"kind", "gaussian"},
                                  {"amp", cplx(g.amplitude)},
                                  {"sigma", g.sigma},
                                  {"omega_c", g.center}};
          },
          [&](const Tabulated& t) {
            std::vector<double> re;
            std::vector<double> im;
            for (auto v : t.values) {
              re.push_back(v.real());
              im.push_back(v.imag());
            }
            return nlohmann::json{{"kind", "tabulated"},
                                  {"omega", t.omega},
                                  {"re", re},
                                  {"im", im}};
          },
          [&](const NearDelta& d) {
            return nlohmann::json{{"kind", "near_delta"},
                                  {"omega_c", d.center},
                                  {"epsilon", d.epsilon}};
          }},
      p.kind());
}

}  // namespace tfrw
