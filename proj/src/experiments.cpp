#include "nlsplit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>

namespace nlsplit {

namespace {

constexpr double kTimeTolerance = 1e-9;

bool is_multiple(double t, double spacing) {
  const double ratio = t / spacing;
  return std::abs(ratio - std::round(ratio)) <= kTimeTolerance * std::max(1.0, std::abs(ratio));
}

std::int64_t steps_in(double t, double tau) { return std::llround(t / tau); }

std::vector<double> multiples_up_to(double horizon, double spacing) {
  std::vector<double> out;
  const std::int64_t n = std::llround(horizon / spacing);
  for (std::int64_t k = 0; k <= n; ++k) out.push_back(double(k) * spacing);
  return out;
}

std::vector<double> quarter_ladder(double t_final) {
  return {t_final / 8, t_final / 4, t_final / 2, t_final};
}

SchemeParams<double> scheme_at(const StudyConfig& cfg, double tau, bool filtered) {
  SchemeParams<double> p = cfg.scheme;
  p.tau = tau;
  p.filter_enabled = filtered;
  return p;
}

// Re-throws solver failures with the step size of the run attached.
template <typename Fn>
auto tagged(double tau, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const NonFiniteError& e) {
    throw NonFiniteError(e.step(), tau);
  } catch (const BoundaryLeakError& e) {
    throw BoundaryLeakError(e.time(), e.fraction(), tau);
  }
}

void require_reference(const Trajectory<double>& reference, double finest_needed) {
  if (reference.tau > finest_needed * (1 + 1e-12))
    throw ConstraintError("reference_refinement", "reference step is coarser than the study requires");
}

double stride_spacing(const StudyConfig& cfg, double tau, bool long_horizon) {
  std::int64_t stride = cfg.checkpoint_stride;
  if (stride <= 0) stride = long_horizon ? std::int64_t(std::ceil(1.0 / tau - 1e-12)) : 1;
  return double(stride) * tau;
}

Trajectory<double> run_scheme(const Fieldd& phi, const SchemeParams<double>& params, double horizon, double spacing) {
  if (!is_multiple(horizon, params.tau) || !is_multiple(spacing, params.tau))
    throw ConstraintError("tau_list", "step does not divide the sampling times");
  return tagged(params.tau, [&] {
    return evolve(phi, params, steps_in(horizon, params.tau), steps_in(spacing, params.tau));
  });
}

double sup_error(const Trajectory<double>& run, const Trajectory<double>& reference, double horizon) {
  double out = 0;
  for (std::size_t n = 0; n < run.size(); ++n) {
    if (run.times[n] > horizon * (1 + kTimeTolerance)) break;
    out = std::max(out, std::sqrt(mass(run.fields[n] - reference.at(run.times[n]))));
  }
  return out;
}

Trajectory<double> free_flow_samples(const Fieldd& phi, const std::vector<double>& times) {
  Trajectory<double> out;
  out.tau = 0;
  for (double t : times) {
    out.times.push_back(t);
    out.steps.push_back(0);
    out.fields.push_back(linear_flow(phi, t));
  }
  return out;
}

}  // namespace

std::string to_string(DatumKind kind) {
  switch (kind) {
    case DatumKind::gaussian: return "gaussian";
    case DatumKind::modulated_gaussian: return "modulated_gaussian";
    case DatumKind::rough_sobolev: return "rough_sobolev";
  }
  return "unknown";
}

DatumKind parse_datum_kind(const std::string& name) {
  if (name == "gaussian") return DatumKind::gaussian;
  if (name == "modulated_gaussian") return DatumKind::modulated_gaussian;
  if (name == "rough_sobolev") return DatumKind::rough_sobolev;
  throw UnknownKindError("unknown datum kind '" + name + "'");
}

Fieldd make_datum(DatumKind kind, const Gridd& grid, const DatumParams& params, std::uint64_t seed) {
  using Complex = std::complex<double>;
  if (kind == DatumKind::gaussian)
    return Fieldd::sample(grid, [](const Point<double>& x) { return Complex(std::exp(-x.squaredNorm())); });
  if (kind == DatumKind::modulated_gaussian) {
    const double k0 = params.modulation;
    return Fieldd::sample(grid, [k0](const Point<double>& x) {
      return std::exp(-x.squaredNorm()) * std::polar(1.0, k0 * x(0));
    });
  }

  // rough_sobolev
  Spectrum<double> s{grid, ComplexVector<double>(grid.size())};
  for (Eigen::Index n = 0; n < grid.size(); ++n) {
    std::vector<std::uint32_t> key{std::uint32_t(seed), std::uint32_t(seed >> 32)};
    for (int a = 0; a < grid.dimension(); ++a)
      key.push_back(std::uint32_t(std::int64_t(grid.mode_1d(grid.axis_index(n, a))) + (std::int64_t(1) << 31)));
    std::seed_seq seq(key.begin(), key.end());
    std::mt19937_64 rng(seq);
    const double theta = 2.0 * EIGEN_PI * std::generate_canonical<double, 53>(rng);
    const double bracket = std::sqrt(1.0 + grid.wavevector(n).squaredNorm());
    s.coefficients(n) = std::polar(std::pow(bracket, -params.rough_exponent), theta);
  }
  Fieldd f = inverse_transform(s);
  const double width = grid.half_width() / 8;
  f.values.array() *= (-grid.radius_squared() / (2 * width * width)).exp().cast<Complex>();
  f.values /= std::sqrt(mass(f));
  return f;
}

Fieldd make_datum(const std::string& kind, const Gridd& grid, const DatumParams& params, std::uint64_t seed) {
  return make_datum(parse_datum_kind(kind), grid, params, seed);
}

double StudyConfig::tau_max() const { return *std::max_element(tau_list.begin(), tau_list.end()); }
double StudyConfig::tau_min() const { return *std::min_element(tau_list.begin(), tau_list.end()); }

std::vector<double> StudyConfig::resolved_horizons() const {
  std::vector<double> out = horizons.empty() ? quarter_ladder(t_final) : horizons;
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> StudyConfig::resolved_sample_times() const {
  std::vector<double> out = sample_times.empty() ? quarter_ladder(t_final) : sample_times;
  std::sort(out.begin(), out.end());
  return out;
}

void StudyConfig::validate() const {
  const SigmaVerdict verdict = sigma_constraint_check(scheme.sigma, grid.dimension());
  if (!verdict.valid) throw ConstraintError("sigma", verdict.reasons.front());
  if (!scheme.chi.regular_enough_for(grid.dimension()))
    throw ConstraintError("regularity_order", "cutoff needs k > 1 + d/2");
  if (tau_list.empty()) throw ConstraintError("tau_list", "must not be empty");
  for (double tau : tau_list)
    if (!(tau > 0 && tau < 1)) throw ConstraintError("tau_list", "every tau must lie in (0, 1)");
  std::vector<double> sorted = tau_list;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConstraintError("tau_list", "values must be distinct");
  if (!(t_final > 0) || !std::isfinite(t_final)) throw ConstraintError("t_final", "must be positive");
  if (reference_refinement < 1) throw ConstraintError("reference_refinement", "must be >= 1");
  if (checkpoint_stride < 0) throw ConstraintError("checkpoint_stride", "must be >= 0");
  if (!(datum_params.rough_exponent > 0)) throw ConstraintError("rough_exponent", "must be positive");
  if (!std::isfinite(datum_params.modulation)) throw ConstraintError("modulation", "must be finite");
  if (!(tolerance_scale > 0)) throw ConstraintError("tolerance_scale", "must be positive");
  for (double h : horizons)
    if (!(h > 0)) throw ConstraintError("horizons", "must be positive");
  for (double s : sample_times)
    if (!(s > 0)) throw ConstraintError("sample_times", "must be positive");
}

bool operator==(const StudyConfig& a, const StudyConfig& b) {
  return a.grid == b.grid && a.scheme.sigma == b.scheme.sigma && a.scheme.filter_enabled == b.scheme.filter_enabled &&
         a.scheme.chi.regularity_order() == b.scheme.chi.regularity_order() && a.datum == b.datum &&
         a.datum_params.modulation == b.datum_params.modulation &&
         a.datum_params.rough_exponent == b.datum_params.rough_exponent && a.seed == b.seed &&
         a.tau_list == b.tau_list && a.t_final == b.t_final && a.checkpoint_stride == b.checkpoint_stride &&
         a.reference_refinement == b.reference_refinement && a.horizons == b.horizons &&
         a.sample_times == b.sample_times && a.linear_only == b.linear_only && a.tolerance_scale == b.tolerance_scale;
}

SigmaVerdict sigma_constraint_check(double sigma, int dimension) {
  SigmaVerdict v;
  const double d = dimension;
  v.mass_supercritical = sigma >= 2.0 / d;
  v.energy_subcritical = dimension <= 2 || sigma < 2.0 / (d - 2.0);
  v.smooth_nonlinearity = sigma > 0.5;
  if (!v.mass_supercritical)
    v.reasons.push_back("sigma below the mass-critical exponent 2/d = " + std::to_string(2.0 / d));
  if (!v.energy_subcritical)
    v.reasons.push_back("sigma not below the energy-critical exponent 2/(d-2) = " + std::to_string(2.0 / (d - 2.0)));
  if (!v.smooth_nonlinearity) v.reasons.push_back("sigma must exceed 1/2");
  v.valid = v.mass_supercritical && v.energy_subcritical && v.smooth_nonlinearity;
  return v;
}

// ---------------------------------------------------------------------------

double sample_spacing(const StudyConfig& cfg, bool long_horizon) {
  return stride_spacing(cfg, cfg.tau_max(), long_horizon);
}

Trajectory<double> build_reference(const StudyConfig& cfg, double horizon, double spacing, double tau_min) {
  const Fieldd phi = make_datum(cfg.datum, cfg.grid, cfg.datum_params, cfg.seed);
  const std::vector<double> samples = multiples_up_to(horizon, spacing);
  if (cfg.linear_only) return free_flow_samples(phi, samples);
  const double tau_ref = tau_min / cfg.reference_refinement;
  return tagged(tau_ref, [&] { return strang_reference(phi, cfg.scheme.sigma, tau_ref, horizon, samples); });
}

double fit_order(const std::vector<double>& taus, const std::vector<double>& errors) {
  if (taus.size() != errors.size() || taus.size() < 2) throw std::invalid_argument("fit_order: need two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    mx += std::log(taus[i]);
    my += std::log(errors[i]);
  }
  mx /= double(taus.size());
  my /= double(taus.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double dx = std::log(taus[i]) - mx;
    sxy += dx * (std::log(errors[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ConvergenceResult run_convergence_study(const StudyConfig& cfg) {
  cfg.validate();
  const double spacing = sample_spacing(cfg, false);
  return run_convergence_study(cfg, build_reference(cfg, cfg.t_final, spacing, cfg.tau_min()));
}

ConvergenceResult run_convergence_study(const StudyConfig& cfg, const Trajectory<double>& reference) {
  cfg.validate();
  if (cfg.tau_list.size() < 4) throw ConstraintError("tau_list", "a convergence study needs at least 4 values");
  for (double tau : cfg.tau_list) {
    const double level = std::log2(cfg.tau_max() / tau);
    if (std::abs(level - std::round(level)) > 1e-12) throw ConstraintError("tau_list", "values must be dyadic");
  }
  if (!cfg.linear_only) require_reference(reference, cfg.tau_min() / cfg.reference_refinement);

  const Fieldd phi = make_datum(cfg.datum, cfg.grid, cfg.datum_params, cfg.seed);
  const double spacing = sample_spacing(cfg, false);
  std::vector<double> taus = cfg.tau_list;
  std::sort(taus.begin(), taus.end(), std::greater<>());

  std::vector<std::future<ConvergenceRow>> pending;
  for (double tau : taus) {
    pending.push_back(std::async(std::launch::async, [&, tau] {
      const Trajectory<double> run = run_scheme(phi, scheme_at(cfg, tau, cfg.scheme.filter_enabled), cfg.t_final, spacing);
      ConvergenceRow row;
      row.tau = tau;
      row.n_steps = steps_in(cfg.t_final, tau);
      row.sup_error_l2 = sup_error(run, reference, cfg.t_final);
      row.final_error_l2 = std::sqrt(mass(run.fields.back() - reference.at(run.times.back())));
      return row;
    }));
  }

  ConvergenceResult out;
  for (auto& p : pending) out.rows.push_back(p.get());
  out.strictly_decreasing = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    out.strictly_decreasing = out.strictly_decreasing && out.rows[i].sup_error_l2 < out.rows[i - 1].sup_error_l2;

  out.largest_tau_excluded = out.rows.front().sup_error_l2 > 0.1 * std::sqrt(mass(phi));
  std::vector<double> fit_tau, fit_err;
  for (std::size_t i = out.largest_tau_excluded ? 1 : 0; i < out.rows.size(); ++i) {
    fit_tau.push_back(out.rows[i].tau);
    fit_err.push_back(out.rows[i].sup_error_l2);
  }
  out.fitted_order = fit_order(fit_tau, fit_err);
  return out;
}

UniformityResult run_uniformity_study(const StudyConfig& cfg) {
  cfg.validate();
  const double tau = cfg.tau_list.front();
  const std::vector<double> horizons = cfg.resolved_horizons();
  return run_uniformity_study(cfg, build_reference(cfg, horizons.back(), stride_spacing(cfg, tau, true), tau));
}

UniformityResult run_uniformity_study(const StudyConfig& cfg, const Trajectory<double>& reference) {
  cfg.validate();
  UniformityResult out;
  out.tau = cfg.tau_list.front();
  if (!cfg.linear_only) require_reference(reference, out.tau / cfg.reference_refinement);
  const std::vector<double> horizons = cfg.resolved_horizons();
  const double spacing = stride_spacing(cfg, out.tau, true);
  const Fieldd phi = make_datum(cfg.datum, cfg.grid, cfg.datum_params, cfg.seed);

  auto filtered = std::async(std::launch::async, [&] {
    return run_scheme(phi, scheme_at(cfg, out.tau, true), horizons.back(), spacing);
  });
  const Trajectory<double> unfiltered = run_scheme(phi, scheme_at(cfg, out.tau, false), horizons.back(), spacing);
  const Trajectory<double> with_filter = filtered.get();

  for (double h : horizons)
    out.rows.push_back({h, sup_error(with_filter, reference, h), sup_error(unfiltered, reference, h)});
  const std::size_t mid = (out.rows.size() - 1) / 2;
  out.growth_ratio = out.rows.back().sup_error_filtered / out.rows[mid].sup_error_filtered;
  return out;
}

TrajectoryRow trajectory_row(const Fieldd& u, double t, double sigma) {
  TrajectoryRow row;
  row.t = t;
  row.mass = mass(u);
  row.energy = energy(u, sigma);
  const auto p = pseudoconformal_quantity(u, t, sigma);
  row.pseudoconf_total = p.total;
  row.j_norm_sq = p.j_norm_sq;
  const double r0 = 2 * sigma + 2;
  row.l_r0_norm = lp_norm(u, r0);
  row.compensated_decay = std::pow(t, delta_of_r(r0, u.grid.dimension())) * row.l_r0_norm;
  return row;
}

namespace {

std::vector<TrajectoryRow> rows_of(const Trajectory<double>& traj, double sigma) {
  std::vector<TrajectoryRow> out;
  for (std::size_t n = 0; n < traj.size(); ++n) out.push_back(trajectory_row(traj.fields[n], traj.times[n], sigma));
  return out;
}

double window_spread(const std::vector<TrajectoryRow>& rows, double start) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& r : rows) {
    if (r.t < start * (1 - kTimeTolerance)) continue;
    lo = std::min(lo, r.compensated_decay);
    hi = std::max(hi, r.compensated_decay);
  }
  return hi / lo;
}

}  // namespace

DecayResult run_decay_study(const StudyConfig& cfg) {
  cfg.validate();
  const double tau = cfg.tau_list.front();
  return run_decay_study(cfg, build_reference(cfg, cfg.t_final, stride_spacing(cfg, tau, true), tau));
}

DecayResult run_decay_study(const StudyConfig& cfg, const Trajectory<double>& reference) {
  cfg.validate();
  const double tau = cfg.tau_list.front();
  if (!cfg.linear_only) require_reference(reference, tau / cfg.reference_refinement);
  const double spacing = stride_spacing(cfg, tau, true);
  const double sigma = cfg.scheme.sigma;

  DecayResult out;
  out.delta_r0 = delta_of_r(2 * sigma + 2, cfg.grid.dimension());
  out.window_start = cfg.t_final / 8;

  Trajectory<double> ref_samples;
  for (double t : multiples_up_to(cfg.t_final, spacing)) {
    ref_samples.times.push_back(t);
    ref_samples.fields.push_back(reference.at(t));
  }
  const Fieldd phi = make_datum(cfg.datum, cfg.grid, cfg.datum_params, cfg.seed);
  const Trajectory<double> numerical = run_scheme(phi, scheme_at(cfg, tau, true), cfg.t_final, spacing);

  out.reference = rows_of(ref_samples, sigma);
  out.numerical = rows_of(numerical, sigma);
  out.reference_spread = window_spread(out.reference, out.window_start);
  out.numerical_spread = window_spread(out.numerical, out.window_start);

  out.reference_raw_decreasing = true;
  double previous = std::numeric_limits<double>::infinity();
  for (const auto& r : out.reference) {
    if (r.t < out.window_start * (1 - kTimeTolerance)) continue;
    out.reference_raw_decreasing = out.reference_raw_decreasing && r.l_r0_norm < previous;
    previous = r.l_r0_norm;
  }
  return out;
}

namespace {

std::vector<ScatteringRow> cauchy_rows(const std::vector<double>& times, const std::vector<Fieldd>& profiles) {
  std::vector<ScatteringRow> out;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const Fieldd diff = profiles[k] - profiles[k - 1];
    out.push_back({times[k], std::sqrt(mass(diff)), sigma_norm(diff)});
  }
  return out;
}

// w(t) = S(-t) u(t) at each time.
std::vector<Fieldd> profiles_of(const Trajectory<double>& traj, const std::vector<double>& times) {
  std::vector<Fieldd> out;
  for (double t : times) out.push_back(linear_flow(traj.at(t), -t));
  return out;
}

}  // namespace

ScatteringResult run_scattering_study(const StudyConfig& cfg) {
  cfg.validate();
  const std::vector<double> times = cfg.resolved_sample_times();
  const double tau = cfg.tau_list.front();
  const Fieldd phi = make_datum(cfg.datum, cfg.grid, cfg.datum_params, cfg.seed);
  if (cfg.linear_only) return run_scattering_study(cfg, free_flow_samples(phi, times));
  const double tau_ref = tau / 4 / cfg.reference_refinement;
  const Trajectory<double> reference = tagged(
      tau_ref, [&] { return strang_reference(phi, cfg.scheme.sigma, tau_ref, times.back(), times); });
  return run_scattering_study(cfg, reference);
}

ScatteringResult run_scattering_study(const StudyConfig& cfg, const Trajectory<double>& reference) {
  cfg.validate();
  ScatteringResult out;
  out.tau = cfg.tau_list.front();
  const std::vector<double> times = cfg.resolved_sample_times();

  const std::vector<Fieldd> ref_profiles = profiles_of(reference, times);
  out.reference = cauchy_rows(times, ref_profiles);
  out.reference_cauchy_decreasing = true;
  for (std::size_t k = 1; k < out.reference.size(); ++k)
    out.reference_cauchy_decreasing =
        out.reference_cauchy_decreasing && out.reference[k].cauchy_l2 < out.reference[k - 1].cauchy_l2;
  if (cfg.linear_only) return out;

  require_reference(reference, out.tau / 4 / cfg.reference_refinement);
  const Fieldd phi = make_datum(cfg.datum, cfg.grid, cfg.datum_params, cfg.seed);
  auto numerical_profiles = [&](double tau) {
    std::int64_t common = 0;
    for (double t : times) {
      if (!is_multiple(t, tau)) throw ConstraintError("sample_times", "must be multiples of tau/4");
      common = std::gcd(common, steps_in(t, tau));
    }
    const Trajectory<double> run = run_scheme(phi, scheme_at(cfg, tau, true), times.back(), double(common) * tau);
    return profiles_of(run, times);
  };

  auto quarter = std::async(std::launch::async, [&] { return numerical_profiles(out.tau / 4); });
  const std::vector<Fieldd> coarse = numerical_profiles(out.tau);
  const std::vector<Fieldd> fine = quarter.get();

  out.numerical = cauchy_rows(times, coarse);
  out.u_plus_error_tau = std::sqrt(mass(coarse.back() - ref_profiles.back()));
  out.u_plus_error_quarter_tau = std::sqrt(mass(fine.back() - ref_profiles.back()));
  out.u_plus_shrink = out.u_plus_error_tau / out.u_plus_error_quarter_tau;
  return out;
}

std::vector<TrajectoryRow> run_single(const StudyConfig& cfg) {
  cfg.validate();
  const double tau = cfg.tau_list.front();
  const Fieldd phi = make_datum(cfg.datum, cfg.grid, cfg.datum_params, cfg.seed);
  const Trajectory<double> run =
      run_scheme(phi, scheme_at(cfg, tau, cfg.scheme.filter_enabled), cfg.t_final, stride_spacing(cfg, tau, true));
  return rows_of(run, cfg.scheme.sigma);
}

// ---------------------------------------------------------------------------

double max_relative_mass_increase(const Fieldd& phi, const SchemeParams<double>& params, std::int64_t n_steps) {
  Fieldd u = params.filter_enabled ? apply_cutoff(phi, params.tau, params.chi) : phi;
  LieTrotterStepper<double> stepper(u.grid, params);
  const double datum_mass = mass(phi);
  double previous = mass(u);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::int64_t n = 1; n <= n_steps; ++n) {
    stepper.step(u);
    if (!u.all_finite()) throw NonFiniteError(n, params.tau);
    const double current = mass(u);
    worst = std::max(worst, (current - previous) / datum_mass);
    previous = current;
  }
  return worst;
}

double max_relative_mass_drift(const Fieldd& phi, const SchemeParams<double>& params, std::int64_t n_steps) {
  Fieldd u = params.filter_enabled ? apply_cutoff(phi, params.tau, params.chi) : phi;
  LieTrotterStepper<double> stepper(u.grid, params);
  const double initial = mass(u);
  double worst = 0;
  for (std::int64_t n = 1; n <= n_steps; ++n) {
    stepper.step(u);
    if (!u.all_finite()) throw NonFiniteError(n, params.tau);
    worst = std::max(worst, std::abs(mass(u) - initial) / initial);
  }
  return worst;
}

double relative_drift(const std::vector<double>& values) {
  double worst = 0;
  const double scale = std::max(std::abs(values.front()), 1e-14);
  for (double v : values) worst = std::max(worst, std::abs(v - values.front()) / scale);
  return worst;
}

double strang_self_order(const Fieldd& phi, double sigma, double h, double horizon) {
  auto final_state = [&](double step) {
    return strang_reference(phi, sigma, step, horizon, std::vector<double>{horizon}).fields.back();
  };
  auto coarse = std::async(std::launch::async, [&] { return final_state(h); });
  auto middle = std::async(std::launch::async, [&] { return final_state(h / 2); });
  const Fieldd fine = final_state(h / 4);
  const Fieldd mid = middle.get();
  const double e1 = std::sqrt(mass(coarse.get() - mid));
  const double e2 = std::sqrt(mass(mid - fine));
  return std::log2(e1 / e2);
}

std::vector<double> bernstein_ratios(const Fieldd& f, const std::vector<double>& taus, const CutoffProfile<double>& chi) {
  const double grad = std::sqrt(gradient_norm_squared(f));
  std::vector<double> out;
  for (double tau : taus) out.push_back(std::sqrt(mass(apply_cutoff(f, tau, chi) - f)) / (std::sqrt(tau) * grad));
  return out;
}

double commutator_discrepancy(const Fieldd& f, double t, double tau, const CutoffProfile<double>& chi) {
  const auto c = commutator_J_cutoff(f, t, tau, chi);
  double diff = 0;
  for (std::size_t a = 0; a < c.composed.size(); ++a) diff += mass(c.composed[a] - c.symbol[a]);
  return std::sqrt(diff / norm_squared(c.symbol));
}

double commutator_time_spread(const Fieldd& f, double t1, double t2, double tau, const CutoffProfile<double>& chi) {
  const auto a = commutator_J_cutoff(f, t1, tau, chi);
  const auto b = commutator_J_cutoff(f, t2, tau, chi);
  double diff = 0;
  for (std::size_t k = 0; k < a.composed.size(); ++k) diff += mass(a.composed[k] - b.composed[k]);
  return std::sqrt(diff);
}

double commutator_bound_ratio(const Fieldd& f, double t, double tau, const CutoffProfile<double>& chi) {
  const auto c = commutator_J_cutoff(f, t, tau, chi);
  return std::sqrt(norm_squared(c.composed)) / (std::sqrt(tau) * chi.max_gradient() * std::sqrt(mass(f)));
}

double j_forms_discrepancy(const Fieldd& f, double t) {
  const auto direct = apply_J_direct(f, t);
  const auto factored = apply_J_factored(f, t);
  double diff = 0;
  for (std::size_t a = 0; a < direct.size(); ++a) diff += mass(direct[a] - factored[a]);
  return std::sqrt(diff / norm_squared(direct));
}

double discrete_duhamel_defect(const Fieldd& phi, const SchemeParams<double>& params, int n_max) {
  const Trajectory<double> z = evolve(phi, params, n_max);
  const ComplexArray<double> one_step = params.filter_enabled
                                            ? propagator_symbol(phi.grid, params.tau, &params.chi, params.tau)
                                            : propagator_symbol(phi.grid, params.tau);
  // A^m through the m-th power of the one-step symbol.
  auto propagate = [&](const Fieldd& f, int m) {
    ComplexArray<double> symbol = ComplexArray<double>::Ones(one_step.size());
    for (int k = 0; k < m; ++k) symbol *= one_step;
    return apply_multiplier(f, symbol);
  };

  double worst = 0;
  for (int n = 1; n <= n_max; ++n) {
    for (int m = 0; m < n; ++m) {
      Fieldd rhs = propagate(z.fields[m], n - m);
      for (int k = m; k < n; ++k) rhs += propagate(nonlinear_flow(z.fields[k], params.tau, params.sigma) - z.fields[k], n - k);
      worst = std::max(worst, std::sqrt(mass(rhs - z.fields[n]) / mass(z.fields[n])));
    }
  }
  return worst;
}

}  // namespace nlsplit
