#include "tfrw/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "tfrw/csv.hpp"
#include "tfrw/errors.hpp"

namespace tfrw {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const std::set<std::string, std::less<>> kSections = {
    "name",    "description", "grid",    "prior",          "profiles",
    "evolution", "k",         "kernel",  "optomech",       "rotating_frame",
    "hubble",  "mirror"};

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw InvalidArgument(fmt::format("field '{}' must be a number", key));
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw InvalidArgument(fmt::format("field '{}' must be finite", key));
  }
  return d;
}

double required_number(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw InvalidArgument(fmt::format("missing field '{}'", key));
  }
  return number(j, key, 0.0);
}

std::size_t count(const json& j, const char* key, std::size_t fallback,
                  std::size_t minimum) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InvalidArgument(
        fmt::format("field '{}' must be a nonnegative integer", key));
  }
  const auto c = v.get<std::size_t>();
  if (c < minimum) {
    throw InvalidArgument(
        fmt::format("field '{}' must be at least {}, got {}", key, minimum, c));
  }
  return c;
}

std::string text(const json& j, const char* key, std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) {
    throw InvalidArgument(fmt::format("field '{}' must be a string", key));
  }
  return j.at(key).get<std::string>();
}

// Rejects non-objects and keys outside `allowed`, so typos do not fall
// back to defaults silently.
void require_object(const json& j,
                    std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw InvalidArgument("must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidArgument(fmt::format("unknown field '{}'", key));
    }
  }
}

// Runs a section parser, prefixing any failure with the section name.
template <class F>
auto in_section(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw InvalidArgument(fmt::format("section '{}': {}", name, e.what()));
  } catch (const Error& e) {
    throw InvalidArgument(fmt::format("section '{}': {}", name, e.what()));
  }
}

GridSpec parse_grid(const json& j) {
  require_object(j, {"points", "spacing", "a_min", "a_max", "n"});
  GridSpec g;
  if (j.contains("points")) {
    g.spacing = Spacing::Explicit;
    g.points = j.at("points").get<std::vector<double>>();
    g.n = g.points.size();
    g.build();
    return g;
  }
  const std::string spacing = text(j, "spacing", "log");
  if (spacing == "log") {
    g.spacing = Spacing::LogUniform;
  } else if (spacing == "uniform") {
    g.spacing = Spacing::Uniform;
  } else {
    throw InvalidArgument(fmt::format(
        "spacing '{}' is not one of log, uniform (or give 'points')", spacing));
  }
  g.a_min = required_number(j, "a_min");
  g.a_max = required_number(j, "a_max");
  g.n = count(j, "n", g.n, 3);
  if (!(g.a_min > 0.0)) {
    throw InvalidArgument(fmt::format(
        "a_min = {} but the scale factor must be strictly positive", g.a_min));
  }
  g.build();
  return g;
}

json to_json(const GridSpec& g) {
  if (g.spacing == Spacing::Explicit) return {{"points", g.points}};
  return {{"spacing", to_string(g.spacing)},
          {"a_min", g.a_min},
          {"a_max", g.a_max},
          {"n", g.n}};
}

PriorSpec parse_prior(const json& j) {
  require_object(j, {"kind", "a0", "sigma"});
  const std::string kind = text(j, "kind", "gaussian");
  if (kind != "gaussian") {
    throw InvalidArgument(fmt::format("prior kind '{}' is not gaussian", kind));
  }
  PriorSpec p{required_number(j, "a0"), required_number(j, "sigma")};
  if (!(p.sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  return p;
}

KernelMethod parse_method(const std::string& s) {
  if (s == "quadrature") return KernelMethod::Quadrature;
  if (s == "closed_form") return KernelMethod::ClosedForm;
  if (s == "auto") return KernelMethod::Auto;
  throw InvalidArgument(fmt::format(
      "kernel_method '{}' is not one of quadrature, closed_form, auto", s));
}

const char* to_string(KernelMethod m) {
  switch (m) {
    case KernelMethod::Quadrature: return "quadrature";
    case KernelMethod::ClosedForm: return "closed_form";
    case KernelMethod::Auto: return "auto";
  }
  return "quadrature";
}

ProfilesSpec parse_profiles(const json& j) {
  require_object(j, {"emit", "detect", "kernel_method"});
  if (!j.contains("emit") || !j.contains("detect")) {
    throw InvalidArgument("needs both 'emit' and 'detect' profiles");
  }
  ProfilesSpec p{profile_from_json(j.at("emit")),
                 profile_from_json(j.at("detect")),
                 parse_method(text(j, "kernel_method", "quadrature"))};
  p.kernel();  // closed_form without Lorentzian lines fails here
  return p;
}

KernelScanSpec parse_kernel_scan(const json& j) {
  require_object(j, {"r_min", "r_max", "n"});
  KernelScanSpec k;
  k.r_min = number(j, "r_min", k.r_min);
  k.r_max = number(j, "r_max", k.r_max);
  k.n = count(j, "n", k.n, 4);
  if (!(k.r_min > 0.0) || !(k.r_min < k.r_max)) {
    throw InvalidArgument("needs 0 < r_min < r_max");
  }
  return k;
}

OptomechRunSpec parse_optomech(const json& j) {
  require_object(j, {"mass", "x0", "mode", "photons", "hbar", "c", "potential",
                     "initial", "dt", "steps", "integrator", "stride"});
  OptomechRunSpec o;
  o.params = optomech_params_from_json(j);
  if (j.contains("initial")) {
    const json& s = j.at("initial");
    require_object(s, {"a_om", "a_dot"});
    o.initial.a_om = number(s, "a_om", 1.0);
    o.initial.a_dot = number(s, "a_dot", 0.0);
  }
  if (!(o.initial.a_om > 0.0)) {
    throw InvalidArgument("initial a_om must be positive");
  }
  o.dt = number(j, "dt", o.dt);
  if (!(o.dt > 0.0)) throw InvalidArgument("dt must be positive");
  o.steps = count(j, "steps", o.steps, 1);
  o.method = integrator_from_string(text(j, "integrator", "velocity-verlet"));
  o.stride = count(j, "stride", o.stride, 1);
  return o;
}

json to_json(const OptomechRunSpec& o) {
  json j = to_json(o.params);
  j["initial"] = {{"a_om", o.initial.a_om}, {"a_dot", o.initial.a_dot}};
  j["dt"] = o.dt;
  j["steps"] = o.steps;
  j["integrator"] = std::string(to_string(o.method));
  j["stride"] = o.stride;
  return j;
}

RotatingFrameConfig parse_frame(const json& j) {
  RotatingFrameConfig cfg = rotating_frame_from_json(j);
  cfg.validate();
  rotating_frame_frequencies(cfg);
  return cfg;
}

HubbleSpec parse_hubble(const json& j) {
  require_object(j, {"H", "a0", "eta_max", "steps"});
  HubbleSpec h;
  h.hubble = required_number(j, "H");
  h.a0 = number(j, "a0", h.a0);
  h.eta_max = number(j, "eta_max", h.eta_max);
  h.steps = count(j, "steps", h.steps, 2);
  if (!(h.a0 > 0.0)) throw InvalidArgument("a0 must be positive");
  if (!(h.eta_max > 0.0)) throw InvalidArgument("eta_max must be positive");
  return h;
}

json to_json(const HubbleSpec& h) {
  return {{"H", h.hubble}, {"a0", h.a0}, {"eta_max", h.eta_max},
          {"steps", h.steps}};
}

MirrorSpec parse_mirror(const json& j) {
  require_object(j, {"x_min", "x_max", "n", "x_center", "sigma", "evolution"});
  MirrorSpec m;
  m.x_min = required_number(j, "x_min");
  m.x_max = required_number(j, "x_max");
  m.n = count(j, "n", m.n, 3);
  m.x_center = number(j, "x_center", m.x_center);
  m.sigma = number(j, "sigma", m.sigma);
  if (!(m.x_min < m.x_max)) throw InvalidArgument("needs x_min < x_max");
  if (!(m.sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (j.contains("evolution")) m.evolution = evolution_from_json(j.at("evolution"));
  return m;
}

json to_json(const MirrorSpec& m) {
  json j{{"x_min", m.x_min},       {"x_max", m.x_max}, {"n", m.n},
         {"x_center", m.x_center}, {"sigma", m.sigma}};
  if (m.evolution) j["evolution"] = to_json(*m.evolution);
  return j;
}

// Delta_k + G_k x must keep the sign of Delta_k (negative) over [lo, hi].
std::vector<std::string> range_issues(const RotatingFrameConfig& cfg,
                                      double lo, double hi,
                                      std::string_view what) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < 2; ++k) {
    const CavityLine& c = cfg.cavities[k];
    for (double x : {lo, hi}) {
      const double v = c.detuning + c.pull * x;
      if (!(v < 0.0)) {
        out.push_back(fmt::format(
            "{}: Delta_{} + G_{} x = {:.6g} at x = {:.6g}; it must stay "
            "negative over the declared range [{:.6g}, {:.6g}]",
            what, k + 1, k + 1, v, x, lo, hi));
        break;
      }
    }
  }
  return out;
}

struct HubbleRange {
  double x_lo;
  double x_hi;
};

HubbleRange hubble_x_range(const HubbleSpec& h, const RotatingFrameConfig& cfg) {
  const double d = 1.0 - h.a0 * h.hubble * h.eta_max;
  if (!(d > 0.0)) {
    throw InvalidRange(fmt::format(
        "a(eta) diverges at eta = {:.6g} before eta_max = {:.6g}",
        1.0 / (h.a0 * h.hubble), h.eta_max));
  }
  const double x0 = x_of_a_om(h.a0, cfg);
  const double x1 = x_of_a_om(h.a0 / d, cfg);
  return {std::min(x0, x1), std::max(x0, x1)};
}

template <class T>
const T& need(const std::optional<T>& v, std::string_view section,
              Command c) {
  if (!v) {
    throw InvalidArgument(fmt::format(
        "subcommand '{}' needs the '{}' section", to_string(c), section));
  }
  return *v;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(fmt::format("cannot write {}", p.string()));
  return os;
}

void write_summary(const fs::path& dir, const json& summary) {
  auto os = open_out(dir / "summary.json");
  os << summary.dump(2) << '\n';
}

json moments_json(const Moments& m) {
  return {{"mean_a", m.mean_a},
          {"std_a", m.std_a},
          {"fwhm_a", m.fwhm_a},
          {"half_max_center", m.half_max_center},
          {"peak_a", m.peak_a},
          {"multimodal", m.multimodal}};
}


json run_kernel(const Scenario& s, const fs::path& out) {
  const ProfilesSpec& p = need(s.profiles, "profiles", Command::Kernel);
  const MeasurementKernel q = p.kernel();
  const KernelScanSpec& scan = s.kernel_scan;
  const auto closed = lorentzian_pair(p.emit, p.detect);

  auto os = open_out(out / "kernel.csv");
  csv::write_header(os, "r [dimensionless],re_q [arb],im_q [arb],abs_q [arb]");
  const double lo = std::log(scan.r_min);
  const double hi = std::log(scan.r_max);
  double max_rel = 0.0;
  for (std::size_t i = 0; i < scan.n; ++i) {
    const double r = std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                       static_cast<double>(scan.n - 1));
    const auto v = q(r);
    csv::write_row(os, {r, v.real(), v.imag(), std::abs(v)});
    if (closed) {
      const auto c = q_lorentzian_closed(*closed, r);
      max_rel = std::max(max_rel, std::abs(v - c) / std::abs(c));
    }
  }

  const PeakResult peak = peak_ratio(q, scan.r_min, scan.r_max);
  json results{{"r_star", peak.r_star}, {"q_abs_max", peak.q_abs_max}};
  try {
    results["log_fwhm"] = log_fwhm(q, scan.r_min, scan.r_max);
  } catch (const InvalidArgument&) {
    results["log_fwhm"] = nullptr;  // half maximum not reached in the scan
  }
  if (closed) {
    results["closed_form_max_rel_error"] = max_rel;
  } else {
    results["closed_form_max_rel_error"] = nullptr;
  }
  return results;
}

json run_measure(const Scenario& s, const fs::path& out) {
  const GridSpec& gs = need(s.grid, "grid", Command::Measure);
  const PriorSpec& ps = need(s.prior, "prior", Command::Measure);
  const ProfilesSpec& p = need(s.profiles, "profiles", Command::Measure);
  const EvolutionKernel b = s.evolution.value_or(EvolutionKernel::identity());

  const ScaleGrid grid = gs.build();
  const UniverseWavefunction prior = gaussian_packet(grid, ps.a0, ps.sigma);
  const PipelineResult r = measure_k_with_kernel(prior, b, p.kernel(), s.k);

  {
    auto os = open_out(out / "prior.csv");
    write_csv(os, prior);
  }
  {
    auto os = open_out(out / "posterior.csv");
    write_csv(os, r.posterior);
  }
  {
    auto os = open_out(out / "history.csv");
    csv::write_header(os,
                      "k [photons],detect_weight [arb],mean_a [dimensionless],"
                      "std_a [dimensionless],fwhm_a [dimensionless],"
                      "peak_a [dimensionless]");
    for (const auto& h : r.history) {
      csv::write_row(os, {static_cast<double>(h.photons), h.detect_weight,
                          h.moments.mean_a, h.moments.std_a, h.moments.fwhm_a,
                          h.moments.peak_a});
    }
  }

  const Moments pm = moments(prior);
  const Moments post = r.history.back().moments;
  // local grid spacing at the posterior mean
  const auto pts = grid.points();
  auto it = std::lower_bound(pts.begin(), pts.end(), post.mean_a);
  std::size_t i = static_cast<std::size_t>(it - pts.begin());
  i = std::clamp<std::size_t>(i, 1, grid.size() - 1);
  json history = json::array();
  for (const auto& h : r.history) {
    json e = moments_json(h.moments);
    e["photons"] = h.photons;
    e["detect_weight"] = h.detect_weight;
    history.push_back(std::move(e));
  }
  return {{"prior", moments_json(pm)},
          {"posterior", moments_json(post)},
          {"mean_a", post.mean_a},
          {"std_a", post.std_a},
          {"fwhm_a", post.fwhm_a},
          {"history", std::move(history)},
          {"detect_weight", r.detect_weight},
          {"photons", s.k},
          {"grid_step_at_mean", grid[i] - grid[i - 1]}};
}

json run_optomech(const Scenario& s, const fs::path& out) {
  const OptomechRunSpec& o = need(s.optomech, "optomech", Command::Optomech);
  const auto traj =
      integrate_trajectory(o.initial, o.params, o.dt, o.steps, o.method);
  const double e0 = mechanical_energy(traj.front(), o.params);
  const double K = o.params.pressure_constant();
  const bool free = std::holds_alternative<FreePotential>(o.params.potential);

  auto os = open_out(out / "trajectory.csv");
  csv::write_header(os, "t [time],a_om [dimensionless],a_dot [1/time],"
                        "energy [energy]");
  double max_drift = 0.0;
  double max_force_residual = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const OptomechState& st = traj[i];
    const double e = mechanical_energy(st, o.params);
    max_drift = std::max(max_drift, std::abs(e - e0) / std::abs(e0));
    if (free && K > 0.0) {
      const double f = free_mirror_accel(st, o.params) * st.a_om * st.a_om;
      max_force_residual = std::max(max_force_residual, std::abs(f - K) / K);
    }
    if (i % o.stride == 0 || i + 1 == traj.size()) {
      csv::write_row(os, {st.t, st.a_om, st.a_dot, e});
    }
  }
  const OptomechState& last = traj.back();
  json results{{"initial_energy", e0},
               {"final_energy", mechanical_energy(last, o.params)},
               {"max_relative_energy_drift", max_drift},
               {"final_a_om", last.a_om},
               {"final_a_dot", last.a_dot}};
  if (free) {
    const double v_inf = terminal_rate(o.initial, o.params);
    results["terminal_rate"] = v_inf;
    results["terminal_rate_relative_error"] =
        std::abs(last.a_dot - v_inf) / v_inf;
    results["max_force_law_residual"] = max_force_residual;
  }
  return results;
}

json run_hubble(const Scenario& s, const fs::path& out) {
  const RotatingFrameConfig& cfg =
      need(s.rotating_frame, "rotating_frame", Command::Hubble);
  const HubbleSpec& h = need(s.hubble, "hubble", Command::Hubble);
  const auto traj = conformal_trajectory(h.hubble, h.a0, h.eta_max, h.steps, cfg);
  const RotatingFrequencies f = rotating_frame_frequencies(cfg);

  auto os = open_out(out / "conformal.csv");
  csv::write_header(os, "eta [conformal time],x [length],a_om [dimensionless]");
  for (const auto& p : traj) csv::write_row(os, {p.eta, p.x, p.a_om});

  const double v = hubble_mirror_velocity(h.hubble, cfg);
  double max_dev = 0.0;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const double slope =
        (traj[i + 1].x - traj[i - 1].x) / (traj[i + 1].eta - traj[i - 1].eta);
    max_dev = std::max(max_dev, std::abs(slope - v));
  }
  return {{"mirror_velocity", v},
          {"max_finite_difference_deviation", max_dev},
          {"nu", f.nu},
          {"omega_tilde", f.omega_tilde}};
}

void write_mirror_csv(const fs::path& p, const MirrorWavefunction& psi) {
  auto os = open_out(p);
  csv::write_header(os, "x [length],re_psi [length^-1/2],im_psi [length^-1/2]");
  for (std::size_t i = 0; i < psi.x.size(); ++i) {
    csv::write_row(os, {psi.x[i], psi.amplitudes[i].real(),
                        psi.amplitudes[i].imag()});
  }
}

json x_moments(const MirrorWavefunction& psi) {
  const auto w = trapezoid_weights(psi.x);
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  std::size_t peak = 0;
  for (std::size_t i = 0; i < psi.x.size(); ++i) {
    const double rho = std::norm(psi.amplitudes[i]);
    m0 += w[i] * rho;
    m1 += w[i] * rho * psi.x[i];
    m2 += w[i] * rho * psi.x[i] * psi.x[i];
    if (rho > std::norm(psi.amplitudes[peak])) peak = i;
  }
  const double mean = m1 / m0;
  return {{"mean_x", mean},
          {"std_x", std::sqrt(std::max(0.0, m2 / m0 - mean * mean))},
          {"peak_x", psi.x[peak]}};
}

json run_mirror(const Scenario& s, const fs::path& out) {
  const RotatingFrameConfig& cfg =
      need(s.rotating_frame, "rotating_frame", Command::MirrorMeasure);
  const MirrorSpec& m = need(s.mirror, "mirror", Command::MirrorMeasure);
  const ProfilesSpec& p = need(s.profiles, "profiles", Command::MirrorMeasure);
  if (const auto issues = range_issues(cfg, m.x_min, m.x_max, "mirror");
      !issues.empty()) {
    throw InvalidRange(issues.front());
  }
  const MirrorWavefunction psi =
      gaussian_mirror_packet(m.x_min, m.x_max, m.n, m.x_center, m.sigma);
  const MirrorUpdate u = mirror_posterior_update(psi, cfg, p.event(), m.evolution);
  write_mirror_csv(out / "mirror_prior.csv", u.prior);
  write_mirror_csv(out / "mirror_posterior.csv", u.posterior);
  return {{"prior", x_moments(u.prior)},
          {"posterior", x_moments(u.posterior)},
          {"posterior_a", moments_json(moments(u.posterior_a))},
          {"prior_norm_in_a", u.prior_a.norm_squared()},
          {"detect_weight", u.detect_weight}};
}

}  // namespace

ScaleGrid GridSpec::build() const {
  switch (spacing) {
    case Spacing::LogUniform: return ScaleGrid::log_uniform(a_min, a_max, n);
    case Spacing::Uniform: return ScaleGrid::uniform(a_min, a_max, n);
    case Spacing::Explicit: return ScaleGrid::from_points(points);
  }
  throw InvalidArgument("unknown grid spacing");
}

MeasurementKernel ProfilesSpec::kernel() const {
  if (method == KernelMethod::Quadrature) {
    return MeasurementKernel::from_profiles(emit, detect);
  }
  if (const auto pair = lorentzian_pair(emit, detect)) {
    return MeasurementKernel::closed_form(*pair);
  }
  if (method == KernelMethod::ClosedForm) {
    throw InvalidArgument(
        "kernel_method closed_form needs Lorentzian emit and detect profiles");
  }
  return MeasurementKernel::from_profiles(emit, detect);
}

json Scenario::resolved() const {
  json j = json::object();
  j["name"] = name;
  if (grid) j["grid"] = to_json(*grid);
  if (prior) {
    j["prior"] = {{"kind", "gaussian"}, {"a0", prior->a0}, {"sigma", prior->sigma}};
  }
  if (profiles) {
    j["profiles"] = {{"emit", to_json(profiles->emit)},
                     {"detect", to_json(profiles->detect)},
                     {"kernel_method", to_string(profiles->method)}};
  }
  if (evolution) j["evolution"] = to_json(*evolution);
  j["k"] = k;
  j["kernel"] = {{"r_min", kernel_scan.r_min},
                 {"r_max", kernel_scan.r_max},
                 {"n", kernel_scan.n}};
  if (optomech) j["optomech"] = to_json(*optomech);
  if (rotating_frame) j["rotating_frame"] = to_json(*rotating_frame);
  if (hubble) j["hubble"] = to_json(*hubble);
  if (mirror) j["mirror"] = to_json(*mirror);
  return j;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Kernel: return "kernel";
    case Command::Measure: return "measure";
    case Command::Optomech: return "optomech";
    case Command::Hubble: return "hubble";
    case Command::MirrorMeasure: return "mirror-measure";
    case Command::Validate: return "validate";
  }
  return "unknown";
}

std::optional<Command> command_from_string(std::string_view s) {
  for (Command c : {Command::Kernel, Command::Measure, Command::Optomech,
                    Command::Hubble, Command::MirrorMeasure, Command::Validate}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

json read_json_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw InvalidArgument(fmt::format("cannot read scenario file {}", path.string()));
  }
  std::stringstream buf;
  buf << is.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    // locate the byte offset as line and column
    const std::string s = buf.str();
    const std::size_t off = std::min<std::size_t>(e.byte, s.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < off; ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InvalidArgument(fmt::format("{}:{}:{}: JSON syntax error: {}",
                                      path.string(), line, col, e.what()));
  }
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw InvalidArgument("scenario must be a JSON object");
  Scenario s;
  s.name = in_section("name", [&] { return text(j, "name", ""); });
  if (j.contains("grid")) {
    s.grid = in_section("grid", [&] { return parse_grid(j.at("grid")); });
  }
  if (j.contains("prior")) {
    s.prior = in_section("prior", [&] { return parse_prior(j.at("prior")); });
  }
  if (s.grid && s.prior) {
    in_section("prior", [&] {
      gaussian_packet(s.grid->build(), s.prior->a0, s.prior->sigma);
      return 0;
    });
  }
  if (j.contains("profiles")) {
    s.profiles =
        in_section("profiles", [&] { return parse_profiles(j.at("profiles")); });
  }
  if (j.contains("evolution")) {
    s.evolution = in_section(
        "evolution", [&] { return evolution_from_json(j.at("evolution")); });
  }
  s.k = in_section("k", [&] {
    return static_cast<unsigned>(count(j, "k", 1, 1));
  });
  if (j.contains("kernel")) {
    s.kernel_scan =
        in_section("kernel", [&] { return parse_kernel_scan(j.at("kernel")); });
  }
  if (j.contains("optomech")) {
    s.optomech =
        in_section("optomech", [&] { return parse_optomech(j.at("optomech")); });
  }
  if (j.contains("rotating_frame")) {
    s.rotating_frame = in_section(
        "rotating_frame", [&] { return parse_frame(j.at("rotating_frame")); });
  }
  if (j.contains("hubble")) {
    s.hubble = in_section("hubble", [&] { return parse_hubble(j.at("hubble")); });
  }
  if (j.contains("mirror")) {
    s.mirror = in_section("mirror", [&] { return parse_mirror(j.at("mirror")); });
  }
  return s;
}

std::vector<std::string> validate_scenario(const json& j) {
  std::vector<std::string> issues;
  if (!j.is_object()) return {"scenario must be a JSON object"};
  for (const auto& [key, value] : j.items()) {
    if (!kSections.contains(key)) {
      issues.push_back(fmt::format("unknown section '{}'", key));
    }
  }
  auto check = [&](const char* name, auto&& f) {
    if (!j.contains(name)) return;
    try {
      in_section(name, [&] {
        f(j.at(name));
        return 0;
      });
    } catch (const Error& e) {
      issues.emplace_back(e.what());
    }
  };
  check("grid", [](const json& v) { parse_grid(v); });
  check("prior", [](const json& v) { parse_prior(v); });
  check("profiles", [](const json& v) { parse_profiles(v); });
  check("evolution", [](const json& v) { evolution_from_json(v); });
  check("kernel", [](const json& v) { parse_kernel_scan(v); });
  check("optomech", [](const json& v) { parse_optomech(v); });
  check("hubble", [](const json& v) { parse_hubble(v); });
  check("mirror", [](const json& v) { parse_mirror(v); });
  try {
    in_section("k", [&] { return count(j, "k", 1, 1); });
  } catch (const Error& e) {
    issues.emplace_back(e.what());
  }

  // rotating frame: report the shared-ratio constraint and the atomic
  // frequency sign separately
  std::optional<RotatingFrameConfig> cfg;
  if (j.contains("rotating_frame")) {
    try {
      cfg = rotating_frame_from_json(j.at("rotating_frame"));
    } catch (const std::exception& e) {
      issues.push_back(fmt::format("section 'rotating_frame': {}", e.what()));
    }
  }
  if (cfg) {
    try {
      cfg->validate();
      rotating_frame_frequencies(*cfg);
    } catch (const Error& e) {
      issues.push_back(fmt::format("section 'rotating_frame': {}", e.what()));
      cfg.reset();
    }
  }
  if (cfg && j.contains("mirror")) {
    try {
      const MirrorSpec m = parse_mirror(j.at("mirror"));
      for (auto& s : range_issues(*cfg, m.x_min, m.x_max, "section 'mirror'")) {
        issues.push_back(std::move(s));
      }
    } catch (const std::exception&) {
      // already reported above
    }
  }
  if (cfg && j.contains("hubble")) {
    try {
      const HubbleSpec h = parse_hubble(j.at("hubble"));
      const HubbleRange r = hubble_x_range(h, *cfg);
      for (auto& s : range_issues(*cfg, r.x_lo, r.x_hi, "section 'hubble'")) {
        issues.push_back(std::move(s));
      }
    } catch (const InvalidRange& e) {
      issues.push_back(fmt::format("section 'hubble': {}", e.what()));
    } catch (const std::exception&) {
    }
  }
  if (j.contains("grid") && j.contains("prior")) {
    std::optional<ScaleGrid> grid;
    std::optional<PriorSpec> prior;
    try {
      grid = parse_grid(j.at("grid")).build();
      prior = parse_prior(j.at("prior"));
    } catch (const std::exception&) {
      // already reported above
    }
    if (grid && prior) {
      try {
        gaussian_packet(*grid, prior->a0, prior->sigma);
      } catch (const Error& e) {
        issues.push_back(fmt::format("section 'prior': {}", e.what()));
      }
    }
  }
  return issues;
}

json run_command(Command c, const Scenario& s, const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw Error(fmt::format("cannot create output directory {}: {}",
                            out.string(), ec.message()));
  }
  json results;
  switch (c) {
    case Command::Kernel: results = run_kernel(s, out); break;
    case Command::Measure: results = run_measure(s, out); break;
    case Command::Optomech: results = run_optomech(s, out); break;
    case Command::Hubble: results = run_hubble(s, out); break;
    case Command::MirrorMeasure: results = run_mirror(s, out); break;
    case Command::Validate:
      throw InvalidArgument("validate does not run a simulation");
  }
  json summary{{"version", std::string(kVersion)},
               {"command", std::string(to_string(c))},
               {"config", s.resolved()},
               {"results", results}};
  write_summary(out, summary);
  return summary;
}

}  // namespace tfrw
