#include "tfrw/evolution_kernel.hpp"

#include <cmath>
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

double gaussian_density(double x, double width) {
  return std::exp(-0.5 * x * x / (width * width)) /
         (width * std::sqrt(2.0 * std::numbers::pi));
}

// Probability that N(mean, width) falls outside [lo, hi].
double gaussian_outside(double mean, double width, double lo, double hi) {
  const double k = 1.0 / (width * std::numbers::sqrt2);
  return 0.5 * std::erfc((mean - lo) * k) + 0.5 * std::erfc((hi - mean) * k);
}

double total_mass(const UniverseWavefunction& psi) {
  return psi.norm_squared();
}

void require_grid(const DenseEvolution& d, const ScaleGrid& grid) {
  if (!(d.grid == grid)) {
    throw InvalidArgument("dense evolution kernel defined on a different grid");
  }
}

}  // namespace

EvolutionKernel::EvolutionKernel(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const IdentityEvolution&) {},
                 [](const UniformScaling& u) {
                   if (!(u.s > 0.0)) {
                     throw InvalidArgument("scaling factor s must be positive");
                   }
                 },
                 [](const BroadenedScaling& b) {
                   if (!(b.s > 0.0)) {
                     throw InvalidArgument("scaling factor s must be positive");
                   }
                   if (!(b.width > 0.0)) {
                     throw InvalidArgument("broadening width must be positive");
                   }
                 },
                 [](const DenseEvolution& d) {
                   const auto n = static_cast<Eigen::Index>(d.grid.size());
                   if (d.values.rows() != n || d.values.cols() != n) {
                     throw InvalidArgument(fmt::format(
                         "dense kernel is {}x{} but grid has {} points",
                         d.values.rows(), d.values.cols(), n));
                   }
                 }},
             kind_);
}

EvolutionKernel EvolutionKernel::uniform_scaling(double s) {
  return EvolutionKernel(UniformScaling{s});
}

EvolutionKernel EvolutionKernel::broadened_scaling(double s, double width) {
  return EvolutionKernel(BroadenedScaling{s, width});
}

EvolutionKernel EvolutionKernel::dense(ScaleGrid grid,
                                       Eigen::MatrixXcd values) {
  return EvolutionKernel(DenseEvolution{std::move(grid), std::move(values)});
}

std::optional<double> EvolutionKernel::delta_ratio() const {
  if (std::holds_alternative<IdentityEvolution>(kind_)) return 1.0;
  if (const auto* u = std::get_if<UniformScaling>(&kind_)) return u->s;
  return std::nullopt;
}

Eigen::MatrixXcd EvolutionKernel::linear_map(const ScaleGrid& grid) const {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto w = grid.weights();
  return std::visit(
      overloaded{
          [&](const IdentityEvolution&) -> Eigen::MatrixXcd {
            return Eigen::MatrixXcd::Identity(n, n);
          },
          [&](const UniformScaling& u) -> Eigen::MatrixXcd {
            Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n, n);
            const double ls = std::log(u.s);
            for (Eigen::Index i = 0; i < n; ++i) {
              const auto st = cubic_stencil(
                  grid.log_points(),
                  grid.log_points()[static_cast<std::size_t>(i)] - ls);
              if (!st.inside) continue;
              for (std::size_t k = 0; k < 4; ++k) {
                L(i, static_cast<Eigen::Index>(st.first + k)) =
                    st.weights[k] / u.s;
              }
            }
            return L;
          },
          [&](const BroadenedScaling& b) -> Eigen::MatrixXcd {
            Eigen::MatrixXcd L(n, n);
            const auto lg = grid.log_points();
            const double ls = std::log(b.s);
            for (Eigen::Index i = 0; i < n; ++i) {
              const auto ui = static_cast<std::size_t>(i);
              for (Eigen::Index j = 0; j < n; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                L(i, j) = w[uj] / grid[ui] *
                          gaussian_density(lg[ui] - ls - lg[uj], b.width);
              }
            }
            return L;
          },
          [&](const DenseEvolution& d) -> Eigen::MatrixXcd {
            require_grid(d, grid);
            Eigen::MatrixXcd L = d.values;
            for (Eigen::Index j = 0; j < n; ++j) {
              L.col(j) *= w[static_cast<std::size_t>(j)];
            }
            return L;
          }},
      kind_);
}

Propagated propagate(const EvolutionKernel& b,
                     const UniverseWavefunction& psi) {
  const ScaleGrid& grid = psi.grid();
  const std::size_t n = grid.size();
  const auto w = grid.weights();
  const auto lg = grid.log_points();
  Propagated out;
  out.amplitudes.assign(n, {});

  auto lost = [&](auto outside_fraction) {
    double lost_mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      lost_mass += w[j] * std::norm(psi[j]) * outside_fraction(j);
    }
    const double m = total_mass(psi);
    return m > 0.0 ? lost_mass / m : 0.0;
  };

  if (std::holds_alternative<IdentityEvolution>(b.kind())) {
    out.amplitudes.assign(psi.amplitudes().begin(), psi.amplitudes().end());
    return out;
  }
  if (const auto* u = std::get_if<UniformScaling>(&b.kind())) {
    const double ls = std::log(u->s);
    for (std::size_t i = 0; i < n; ++i) {
      const auto st = cubic_stencil(lg, lg[i] - ls);
      if (!st.inside) continue;
      std::complex<double> v{};
      for (std::size_t k = 0; k < 4; ++k) v += st.weights[k] * psi[st.first + k];
      out.amplitudes[i] = v / u->s;
    }
    out.lost_fraction = lost([&](std::size_t j) {
      return grid.contains(u->s * grid[j]) ? 0.0 : 1.0;
    });
    return out;
  }

  const Eigen::MatrixXcd L = b.linear_map(grid);
  Eigen::VectorXcd h0(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) h0(static_cast<Eigen::Index>(j)) = psi[j];
  const Eigen::VectorXcd h1 = L * h0;
  for (std::size_t i = 0; i < n; ++i) {
    out.amplitudes[i] = h1(static_cast<Eigen::Index>(i));
  }
  if (const auto* br = std::get_if<BroadenedScaling>(&b.kind())) {
    const double ls = std::log(br->s);
    out.lost_fraction = lost([&](std::size_t j) {
      return gaussian_outside(lg[j] + ls, br->width, lg.front(), lg.back());
    });
  }
  return out;
}

UniverseWavefunction apply(const EvolutionKernel& b,
                           const UniverseWavefunction& psi) {
  if (std::holds_alternative<IdentityEvolution>(b.kind())) return psi;
  Propagated p = propagate(b, psi);
  if (p.lost_fraction > kTruncationTolerance) {
    throw SupportTruncation(
        fmt::format("evolution maps {:.3e} of the probability outside the "
                    "grid [{}, {}]",
                    p.lost_fraction, psi.grid().front(), psi.grid().back()),
        p.lost_fraction);
  }
  return normalize(UniverseWavefunction(psi.grid(), std::move(p.amplitudes)))
      .state;
}

EvolutionKernel compose(const EvolutionKernel& b1, const EvolutionKernel& b2) {
  if (std::holds_alternative<IdentityEvolution>(b1.kind())) return b2;
  if (std::holds_alternative<IdentityEvolution>(b2.kind())) return b1;

  const auto* d1 = std::get_if<DenseEvolution>(&b1.kind());
  const auto* d2 = std::get_if<DenseEvolution>(&b2.kind());
  if (d1 || d2) {
    const ScaleGrid& grid = d1 ? d1->grid : d2->grid;
    if (d1 && d2 && !(d1->grid == d2->grid)) {
      throw InvalidArgument("compose: dense kernels live on different grids");
    }
    // B = L1 L2 W^{-1}
    Eigen::MatrixXcd B = b1.linear_map(grid) * b2.linear_map(grid);
    const auto w = grid.weights();
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      B.col(j) /= w[static_cast<std::size_t>(j)];
    }
    return EvolutionKernel::dense(grid, std::move(B));
  }

  auto scale_of = [](const EvolutionKernel& k) {
    if (const auto* u = std::get_if<UniformScaling>(&k.kind())) return u->s;
    return std::get<BroadenedScaling>(k.kind()).s;
  };
  auto width_of = [](const EvolutionKernel& k) {
    if (const auto* b = std::get_if<BroadenedScaling>(&k.kind())) {
      return b->width;
    }
    return 0.0;
  };
  const double s = scale_of(b1) * scale_of(b2);
  const double w1 = width_of(b1);
  const double w2 = width_of(b2);
  if (w1 == 0.0 && w2 == 0.0) return EvolutionKernel::uniform_scaling(s);
  return EvolutionKernel::broadened_scaling(s, std::hypot(w1, w2));
}

EvolutionKernel evolution_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") return EvolutionKernel::identity();
    if (kind == "uniform_scaling") {
      return EvolutionKernel::uniform_scaling(j.at("s").get<double>());
    }
    if (kind == "broadened_scaling") {
      return EvolutionKernel::broadened_scaling(j.at("s").get<double>(),
                                                j.at("width").get<double>());
    }
    if (kind == "dense") {
      ScaleGrid grid =
          ScaleGrid::from_points(j.at("points").get<std::vector<double>>());
      const auto re = j.at("re").get<std::vector<std::vector<double>>>();
      std::vector<std::vector<double>> im;
      if (j.contains("im")) {
        im = j.at("im").get<std::vector<std::vector<double>>>();
      }
      const auto n = static_cast<Eigen::Index>(grid.size());
      if (static_cast<Eigen::Index>(re.size()) != n) {
        throw InvalidArgument("dense kernel: row count does not match grid");
      }
      Eigen::MatrixXcd m(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (static_cast<Eigen::Index>(re[ui].size()) != n ||
            (!im.empty() && static_cast<Eigen::Index>(im[ui].size()) != n)) {
          throw InvalidArgument("dense kernel: ragged matrix");
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const auto uk = static_cast<std::size_t>(k);
          m(i, k) = {re[ui][uk], im.empty() ? 0.0 : im[ui][uk]};
        }
      }
      return EvolutionKernel::dense(std::move(grid), std::move(m));
    }
    throw InvalidArgument(fmt::format("unknown evolution kind '{}'", kind));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(fmt::format("evolution: {}", e.what()));
  }
}

nlohmann::json to_json(const EvolutionKernel& b) {
  return std::visit(
      overloaded{
          [](const IdentityEvolution&) {
            return nlohmann::json{{"kind", "identity"}};
          },
          [](const UniformScaling& u) {
            return nlohmann::json{{"kind", "uniform_scaling"}, {"s", u.s}};
          },
          [](const BroadenedScaling& br) {
            return nlohmann::json{{"kind", "broadened_scaling"},
                                  {"s", br.s},
                                  {"width", br.width}};
          },
          [](const DenseEvolution& d) {
            std::vector<std::vector<double>> re;
            std::vector<std::vector<double>> im;
            for (Eigen::Index i = 0; i < d.values.rows(); ++i) {
              re.emplace_back();
              im.emplace_back();
              for (Eigen::Index k = 0; k < d.values.cols(); ++k) {
                re.back().push_back(d.values(i, k).real());
                im.back().push_back(d.values(i, k).imag());
              }
            }
            return nlohmann::json{
                {"kind", "dense"},
                {"points", std::vector<double>(d.grid.points().begin(),
                                               d.grid.points().end())},
                {"re", re},
                {"im", im}};
          }},
      b.kind());
}

}  // namespace tfrw
