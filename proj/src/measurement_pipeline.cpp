#include "tfrw/measurement_pipeline.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include <fmt/core.h>

#include "tfrw/errors.hpp"
#include "tfrw/interpolation.hpp"

namespace tfrw {
namespace {

using cplx = std::complex<double>;

std::complex<double> ipow(cplx z, unsigned k) {
  cplx out{1.0, 0.0};
  while (k > 0) {
    if (k & 1U) out *= z;
    z *= z;
    k >>= 1U;
  }
  return out;
}

void require_unit_norm(const UniverseWavefunction& psi, const char* op) {
  const double m = psi.norm_squared();
  if (!(std::abs(m - 1.0) <= 1e-6)) {
    throw InvalidArgument(
        fmt::format("{}: prior must be unit-norm (norm^2 = {:.9g})", op, m));
  }
}

void check_truncation(double lost, const ScaleGrid& grid, const char* op) {
  if (lost > kTruncationTolerance) {
    throw SupportTruncation(
        fmt::format("{}: evolution maps {:.3e} of the probability outside "
                    "the grid [{}, {}]",
                    op, lost, grid.front(), grid.back()),
        lost);
  }
}

StepRecord record(unsigned photons, double weight,
                  const UniverseWavefunction& posterior) {
  return StepRecord{photons, weight, moments(posterior)};
}

// Normalizes an unnormalized posterior, keeping its squared norm.
Normalized post_select(const ScaleGrid& grid, std::vector<cplx> amps,
                       const char* op) {
  UniverseWavefunction raw(grid, std::move(amps));
  const double w = raw.norm_squared();
  if (!std::isfinite(w)) {
    throw QuadratureFailure(
        fmt::format("{}: unnormalized posterior is not finite", op),
        std::numeric_limits<double>::infinity());
  }
  if (!(w > 0.0)) {
    throw NoDetection(fmt::format(
        "{}: detection weight is zero, the post-selected branch is empty",
        op));
  }
  return normalize(raw);
}

PipelineResult single_step(const ScaleGrid& grid, std::vector<cplx> amps,
                           unsigned photons, const char* op) {
  Normalized n = post_select(grid, std::move(amps), op);
  PipelineResult out{n.state, n.norm_before, {}};
  out.history.push_back(record(photons, n.norm_before, out.posterior));
  return out;
}

// h(a_i) = sum_j q(a_i / c_j)^p L_ij h0(c_j) for any power p, sharing the
// evolution and the kernel table between powers.
class Update {
 public:
  Update(const UniverseWavefunction& prior, const EvolutionKernel& b,
         const MeasurementKernel& q, const char* op)
      : n_(prior.size()) {
    const Propagated moved = propagate(b, prior);
    check_truncation(moved.lost_fraction, prior.grid(), op);
    if (const auto ratio = b.delta_ratio()) {
      q_delta_ = q(*ratio);
      moved_ = moved.amplitudes;
      return;
    }
    const Eigen::MatrixXcd L = b.linear_map(prior.grid());
    const RatioTable table(q, prior.grid());
    weighted_.resize(n_ * n_);
    q_.resize(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        weighted_[i * n_ + j] =
            L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
            prior[j];
        q_[i * n_ + j] = table(i, j);
      }
    }
  }

  std::vector<cplx> run(unsigned power) const {
    std::vector<cplx> out(n_);
    if (q_delta_) {
      const cplx f = ipow(*q_delta_, power);
      for (std::size_t i = 0; i < n_; ++i) out[i] = f * moved_[i];
      return out;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      cplx acc{};
      for (std::size_t j = 0; j < n_; ++j) {
        const cplx w = weighted_[i * n_ + j];
        if (w != cplx{}) acc += ipow(q_[i * n_ + j], power) * w;
      }
      out[i] = acc;
    }
    return out;
  }

 private:
  std::size_t n_;
  std::optional<cplx> q_delta_;
  std::vector<cplx> moved_;
  std::vector<cplx> weighted_;
  std::vector<cplx> q_;
};

// Chain state: amplitude over (emission epochs of photons in flight, current
// scale factor), current index fastest, oldest photon outermost.
struct ChainState {
  std::size_t n = 0;
  std::size_t axes = 0;
  std::vector<cplx> t;
  std::vector<double> sigma;  // accumulated uniform scaling per photon

  std::size_t outer() const {
    std::size_t m = 1;
    for (std::size_t a = 0; a < axes; ++a) m *= n;
    return m;
  }
};

void chain_emit(ChainState& s) {
  const std::size_t outer = s.outer();
  if (outer * s.n * s.n > kMaxChainEntries) {
    throw InvalidArgument(fmt::format(
        "general_chain: {} photons in flight on a {}-point grid exceed the "
        "tensor limit of {} entries",
        s.axes + 1, s.n, kMaxChainEntries));
  }
  std::vector<cplx> t(outer * s.n * s.n);
  for (std::size_t e = 0; e < outer; ++e) {
    for (std::size_t c = 0; c < s.n; ++c) {
      t[(e * s.n + c) * s.n + c] = s.t[e * s.n + c];
    }
  }
  s.t = std::move(t);
  ++s.axes;
  s.sigma.push_back(1.0);
}

void chain_detect(ChainState& s, const MeasurementKernel& q,
                  const ScaleGrid& grid) {
  const std::size_t n = s.n;
  const double sigma = s.sigma.front();
  std::vector<cplx> offsets;
  std::optional<RatioTable> table;
  if (grid.spacing() == Spacing::LogUniform) {
    const double step = grid.log_step();
    offsets.resize(2 * n - 1);
    for (std::size_t m = 0; m < offsets.size(); ++m) {
      const double d = static_cast<double>(m) - static_cast<double>(n - 1);
      offsets[m] = q(sigma * std::exp(d * step));
    }
  } else {
    table.emplace(q, grid);
  }
  auto qv = [&](std::size_t c, std::size_t e) {
    return table ? (*table)(c, e) : offsets[c + (n - 1) - e];
  };

  const std::size_t rest = s.outer() / n;
  std::vector<cplx> t(rest * n);
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t r = 0; r < rest; ++r) {
      const cplx* src = &s.t[(e * rest + r) * n];
      cplx* dst = &t[r * n];
      for (std::size_t c = 0; c < n; ++c) {
        if (src[c] != cplx{}) dst[c] += qv(c, e) * src[c];
      }
    }
  }
  s.t = std::move(t);
  --s.axes;
  s.sigma.erase(s.sigma.begin());
}

// Uniform scaling with photons in flight: every axis moves together along
// the diagonal so that grid ratios keep their meaning, and the photons
// remember the factor in sigma.
void chain_shift(ChainState& s, double factor, const ScaleGrid& grid) {
  const std::size_t n = s.n;
  const auto lg = grid.log_points();
  const double ls = std::log(factor);
  const std::size_t outer = s.outer();
  std::vector<cplx> t(s.t.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto st = cubic_stencil(lg, lg[i] - ls);
    if (!st.inside) continue;
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t src = st.first + k;
      const auto d = static_cast<std::ptrdiff_t>(i) -
                     static_cast<std::ptrdiff_t>(src);
      const double w = st.weights[k] / factor;
      for (std::size_t e = 0; e < outer; ++e) {
        // decode e, shift each emission index by -d
        std::size_t rem = e;
        std::size_t shifted = 0;
        std::size_t stride = 1;
        bool ok = true;
        for (std::size_t a = 0; a < s.axes; ++a) {
          const auto ea = static_cast<std::ptrdiff_t>(rem % n) - d;
          rem /= n;
          if (ea < 0 || ea >= static_cast<std::ptrdiff_t>(n)) {
            ok = false;
            break;
          }
          shifted += static_cast<std::size_t>(ea) * stride;
          stride *= n;
        }
        if (ok) t[e * n + i] += w * s.t[shifted * n + src];
      }
    }
  }
  s.t = std::move(t);
  for (double& sg : s.sigma) sg *= factor;
}

void chain_evolve(ChainState& s, const EvolutionKernel& b,
                  const ScaleGrid& grid) {
  if (std::holds_alternative<IdentityEvolution>(b.kind())) return;
  if (const auto* u = std::get_if<UniformScaling>(&b.kind())) {
    if (s.axes == 0) {
      s.t = propagate(b, UniverseWavefunction(grid, s.t)).amplitudes;
      return;
    }
    if (grid.spacing() != Spacing::LogUniform) {
      throw InvalidArgument(
          "general_chain: uniform scaling with photons in flight needs a "
          "log-uniform grid");
    }
    chain_shift(s, u->s, grid);
    return;
  }
  const Eigen::MatrixXcd L = b.linear_map(grid);
  const auto n = static_cast<Eigen::Index>(s.n);
  const auto cols = static_cast<Eigen::Index>(s.outer());
  Eigen::Map<Eigen::MatrixXcd> m(s.t.data(), n, cols);
  const Eigen::MatrixXcd out = L * m;
  m = out;
}

}  // namespace

PipelineResult measure_with_kernel(const UniverseWavefunction& prior,
                                   const EvolutionKernel& evolution,
                                   const MeasurementKernel& kernel) {
  constexpr const char* op = "measure_once";
  require_unit_norm(prior, op);
  const Update update(prior, evolution, kernel, op);
  return single_step(prior.grid(), update.run(1), kernel.power(), op);
}

PipelineResult measure_once(const UniverseWavefunction& prior,
                            const EvolutionKernel& evolution,
                            const MeasurementEvent& event) {
  return measure_with_kernel(prior, evolution, event.kernel());
}

PipelineResult simple_example_direct(const UniverseWavefunction& prior,
                                     double s, const SpectralProfile& f,
                                     const SpectralProfile& g) {
  constexpr const char* op = "simple_example_direct";
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw InvalidArgument(fmt::format("{}: s must be positive, got {}", op, s));
  }
  require_unit_norm(prior, op);
  const ScaleGrid& grid = prior.grid();
  const auto lg = grid.log_points();
  const std::size_t n = grid.size();

  double lost = 0.0;
  const auto w = grid.weights();
  for (std::size_t j = 0; j < n; ++j) {
    if (!grid.contains(s * grid[j])) lost += w[j] * std::norm(prior[j]);
  }
  check_truncation(lost, grid, op);

  QuadOptions opts = default_kernel_quadrature();
  opts.rel_tol = 1e-12;
  const double ls = std::log(s);
  std::vector<cplx> amps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = grid[i];
    const cplx h0 = cubic_interpolate(lg, prior.amplitudes(), lg[i] - ls);
    if (h0 == cplx{}) continue;
    const cplx overlap = profile_overlap(f, a / s, g, a, opts);
    amps[i] = overlap * h0 / (a * std::sqrt(s));
  }
  return single_step(grid, std::move(amps), 1, op);
}

PipelineResult measure_k(const UniverseWavefunction& prior,
                         const EvolutionKernel& middle,
                         const MeasurementEvent& event, unsigned k) {
  return measure_k_with_kernel(prior, middle, event.kernel(), k);
}

PipelineResult measure_k_with_kernel(const UniverseWavefunction& prior,
                                     const EvolutionKernel& middle,
                                     const MeasurementKernel& kernel,
                                     unsigned k) {
  constexpr const char* op = "measure_k";
  if (k < 1) throw InvalidArgument("measure_k: k must be at least 1");
  require_unit_norm(prior, op);
  const Update update(prior, middle, kernel, op);
  PipelineResult out{prior, 0.0, {}};
  for (unsigned j = 1; j <= k; ++j) {
    Normalized n = post_select(prior.grid(), update.run(j), op);
    out.history.push_back(record(j, n.norm_before, n.state));
    if (j == k) {
      out.posterior = n.state;
      out.detect_weight = n.norm_before;
    }
  }
  return out;
}

PipelineResult general_chain(const UniverseWavefunction& prior,
                             const std::vector<EvolutionKernel>& kernels,
                             const std::vector<MeasurementEvent>& events,
                             unsigned k) {
  constexpr const char* op = "general_chain";
  const std::size_t N = events.size();
  if (N == 0 || k < 1 || k > N) {
    throw InvalidArgument(fmt::format(
        "{}: need 1 <= k <= N, got k = {} with N = {} events", op, k, N));
  }
  if (kernels.size() != N + k - 1) {
    throw InvalidArgument(fmt::format(
        "{}: {} emissions and {} detections need {} evolution kernels, got {}",
        op, N, k, N + k - 1, kernels.size()));
  }
  require_unit_norm(prior, op);
  const ScaleGrid& grid = prior.grid();

  std::vector<MeasurementKernel> q;
  q.reserve(k);
  for (std::size_t j = 0; j < k; ++j) q.push_back(events[j].kernel());

  ChainState s;
  s.n = grid.size();
  s.t.assign(prior.amplitudes().begin(), prior.amplitudes().end());
  const std::size_t epochs = N + k;
  for (std::size_t i = 0; i < epochs; ++i) {
    if (i < k) chain_emit(s);  // emissions never detected leave no trace
    if (i >= N) chain_detect(s, q[i - N], grid);
    if (i + 1 < epochs) chain_evolve(s, kernels[i], grid);
  }
  return single_step(grid, std::move(s.t), k, op);
}

PipelineResult measure_against_reference(const UniverseWavefunction& prior,
                                         double a_ref,
                                         const MeasurementEvent& event) {
  constexpr const char* op = "measure_against_reference";
  if (!(a_ref > 0.0) || !std::isfinite(a_ref)) {
    throw InvalidArgument(
        fmt::format("{}: reference scale factor must be positive", op));
  }
  require_unit_norm(prior, op);
  const MeasurementKernel q = event.kernel();
  std::vector<cplx> amps(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    amps[i] = q(prior.grid()[i] / a_ref) * prior[i];
  }
  return single_step(prior.grid(), std::move(amps), 1, op);
}

}  // namespace tfrw
