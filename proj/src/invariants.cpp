#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "nlsplit/experiments.hpp"

namespace nlsplit {

namespace {

class Report {
 public:
  explicit Report(double scale) : scale_(scale) {}

  void at_most(const std::string& name, double measured, double bound) {
    bound *= scale_;
    out_.push_back({name, measured, bound, measured <= bound});
  }

  void above(const std::string& name, double measured, double bound) {
    out_.push_back({name, measured, bound, measured > bound});
  }

  void append(std::vector<InvariantResult> more) {
    for (auto& r : more) out_.push_back(std::move(r));
  }

  std::vector<InvariantResult> take() { return std::move(out_); }

 private:
  double scale_;
  std::vector<InvariantResult> out_;
};

std::vector<double> dyadic_sweep(int first, int last) {
  std::vector<double> out;
  for (int k = first; k <= last; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

Fieldd random_field(const Gridd& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Fieldd f(grid);
  for (Eigen::Index n = 0; n < f.values.size(); ++n) f.values(n) = {normal(rng), normal(rng)};
  return f;
}

// A few complex-weighted Gaussian bumps with seeded centers and widths.
Fieldd random_smooth_field(const Gridd& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> center(-3.0, 3.0), width(0.5, 1.5);
  Fieldd f(grid);
  for (int j = 0; j < 4; ++j) {
    const std::complex<double> a(normal(rng), normal(rng));
    const double c = center(rng), s = width(rng);
    f += Fieldd::sample(grid, [&](const Point<double>& x) {
      return a * std::exp(-(x.array() - c).square().sum() / (2 * s * s));
    });
  }
  return f;
}

// Field concentrated where the cutoff at tau is in transition.
Fieldd transition_band_field(const Gridd& grid, double tau) {
  const double k0 = 1.5 / std::sqrt(tau);
  Fieldd f = Fieldd::sample(grid, [k0](const Point<double>& x) {
    return std::exp(-x.squaredNorm() / (2 * 0.3 * 0.3)) * std::polar(1.0, k0 * x(0));
  });
  f.values /= std::sqrt(mass(f));
  return f;
}

double relative_l2(const Fieldd& a, const Fieldd& b) { return std::sqrt(mass(a - b) / mass(b)); }

double max_abs_difference(const Trajectory<double>& a, const Trajectory<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double out = 0;
  for (std::size_t n = 0; n < a.size(); ++n) out = std::max(out, (a.fields[n].values - b.fields[n].values).cwiseAbs().maxCoeff());
  return out;
}

std::vector<InvariantResult> spectral_checks(const StudyConfig& cfg, double scale) {
  Report r(scale);
  std::mt19937_64 rng(cfg.seed);
  const Gridd line(1, 4096, 64.0);
  const Gridd plane(2, 64, 8.0);
  const CutoffProfile<double> chi = cfg.scheme.chi;

  double plancherel = 0;
  for (const Gridd& g : {line, plane}) {
    const Fieldd f = random_field(g, rng);
    const double physical = mass(f);
    const double spectral = plancherel_constant(g) * forward_transform(f).coefficients.squaredNorm();
    plancherel = std::max(plancherel, std::abs(physical - spectral) / physical);
  }
  r.at_most("plancherel", plancherel, 1e-10);

  const Fieldd f = random_field(line, rng);
  const ComplexArray<double> m1 = propagator_symbol(line, 0.3);
  const ComplexArray<double> m2 = symbol_table(line, [&](const Point<double>& xi) {
    return std::complex<double>(chi.value(0.25 * xi.norm()), xi(0) / 10);
  });
  r.at_most("multiplier_composition", relative_l2(apply_multiplier(apply_multiplier(f, m1), m2),
                                                   apply_multiplier(f, (m1 * m2).eval())), 1e-12);

  double contraction = 0, nesting = 0;
  for (double tau : dyadic_sweep(2, 10)) {
    contraction = std::max(contraction, std::sqrt(mass(apply_cutoff(f, tau, chi)) / mass(f)));
    for (const Gridd& g : {line, plane}) {
      const RealArray<double> coarse = cutoff_symbol(g, tau, chi);
      nesting = std::max(nesting, (coarse * cutoff_symbol(g, tau / 4, chi) - coarse).abs().maxCoeff());
    }
  }
  r.at_most("cutoff_contraction", contraction, 1.0);
  r.at_most("cutoff_nesting", nesting, 0.0);

  const Fieldd rough = make_datum(DatumKind::rough_sobolev, line, cfg.datum_params, cfg.seed);
  const std::vector<double> ratios = bernstein_ratios(rough, dyadic_sweep(2, 10), chi);
  r.at_most("bernstein_ratio_spread", *std::max_element(ratios.begin(), ratios.end()) /
                                          *std::min_element(ratios.begin(), ratios.end()), 4.0);
  return r.take();
}

std::vector<InvariantResult> flow_checks(const StudyConfig& cfg, double scale) {
  Report r(scale);
  const Gridd wide(1, 8192, 128.0);
  const Gridd line(1, 4096, 64.0);
  const Fieldd phi = make_datum(DatumKind::gaussian, wide, {}, cfg.seed);
  SchemeParams<double> params = cfg.scheme;
  params.sigma = 2;
  params.tau = std::ldexp(1.0, -10);

  params.filter_enabled = false;
  r.at_most("unfiltered_mass_drift", max_relative_mass_drift(phi, params, 10000), 1e-11);
  params.filter_enabled = true;
  r.at_most("filtered_mass_increase", max_relative_mass_increase(phi, params, 10000), 1e-12);

  const Fieldd small = make_datum(DatumKind::gaussian, line, {}, cfg.seed);
  params.tau = 1.0 / 64;
  const auto first = evolve(small, params, 200, 1);
  r.at_most("determinism", max_abs_difference(first, evolve(small, params, 200, 1)), 0.0);
  const auto strided = evolve(small, params, 200, 10);
  Trajectory<double> subsampled;
  for (std::size_t n = 0; n < first.size(); n += 10) subsampled.fields.push_back(first.fields[n]);
  subsampled.times = strided.times;
  r.at_most("checkpoint_stride_consistency", max_abs_difference(subsampled, strided), 0.0);

  const Fieldd faint = Fieldd::sample(line, [](const Point<double>& x) {
    return std::complex<double>(1e-2 * std::exp(-x.squaredNorm() / 32));
  });
  SchemeParams<double> unfiltered = params;
  unfiltered.filter_enabled = false;
  const auto a = evolve(faint, params, 16, 16);
  const auto b = evolve(faint, unfiltered, 16, 16);
  r.at_most("band_limited_filter_transparency", relative_l2(a.fields.back(), b.fields.back()), 1e-10);

  SchemeParams<double> coarse = params;
  coarse.tau = 1.0 / 16;
  double duhamel = 0;
  for (bool filtered : {true, false}) {
    coarse.filter_enabled = filtered;
    duhamel = std::max(duhamel, discrete_duhamel_defect(small, coarse, 4));
  }
  r.at_most("discrete_duhamel", duhamel, 1e-10);
  return r.take();
}

std::vector<InvariantResult> oracle_checks(const StudyConfig& cfg, double scale) {
  Report r(scale);
  const Gridd wide(1, 8192, 128.0);
  const Gridd line(1, 4096, 64.0);
  const Fieldd phi = make_datum(DatumKind::gaussian, wide, {}, cfg.seed);
  const double tau_ref = std::ldexp(1.0, -10);
  std::vector<double> samples;
  for (int k = 0; k <= 40; ++k) samples.push_back(0.25 * k);

  auto critical_run = std::async(std::launch::async, [&] { return strang_reference(phi, 2.0, tau_ref, 10.0, samples); });
  const auto super = strang_reference(phi, 3.0, tau_ref, 10.0, samples);
  const auto critical = critical_run.get();

  std::vector<double> masses, energies, pc;
  for (std::size_t n = 0; n < critical.size(); ++n) {
    masses.push_back(mass(critical.fields[n]));
    energies.push_back(energy(critical.fields[n], 2.0));
    pc.push_back(pseudoconformal_quantity(critical.fields[n], critical.times[n], 2.0).total);
  }
  r.at_most("strang_mass_drift", relative_drift(masses), 1e-10);
  r.at_most("strang_energy_drift", relative_drift(energies), 1e-6);
  r.at_most("pseudoconformal_drift_critical", relative_drift(pc), 1e-3);

  double increase = -std::numeric_limits<double>::infinity();
  const double p0 = pseudoconformal_quantity(super.fields[0], 0.0, 3.0).total;
  double previous = p0;
  for (std::size_t n = 1; n < super.size(); ++n) {
    const double current = pseudoconformal_quantity(super.fields[n], super.times[n], 3.0).total;
    increase = std::max(increase, (current - previous) / p0);
    previous = current;
  }
  r.at_most("pseudoconformal_increase_supercritical", increase, 0.0);

  const double order = strang_self_order(make_datum(DatumKind::gaussian, line, {}, cfg.seed), 2.0, 1.0 / 64, 5.0);
  r.at_most("strang_self_order_deviation", std::abs(order - 2.0), 0.2);
  return r.take();
}

std::vector<InvariantResult> diagnostic_checks(const StudyConfig& cfg, double scale) {
  Report r(scale);
  const Gridd line(1, 4096, 64.0);
  const Gridd narrow(1, 2048, 16.0);
  const Gridd wide(1, 8192, 128.0);
  const CutoffProfile<double> chi = cfg.scheme.chi;

  const double fine_tau = std::ldexp(1.0, -10);
  const Fieldd band = transition_band_field(line, fine_tau);
  r.at_most("commutator_symbol_identity", commutator_discrepancy(band, 0.0, fine_tau, chi), 1e-12);
  r.at_most("commutator_time_independence", commutator_time_spread(band, 0.0, 7.0, fine_tau, chi), 1e-12);

  double bound = 0;
  for (double tau : dyadic_sweep(2, 10))
    bound = std::max(bound, commutator_bound_ratio(transition_band_field(line, tau), 7.0, tau, chi));
  r.at_most("commutator_norm_bound", bound, 1.0);

  const Fieldd g = make_datum(DatumKind::gaussian, narrow, {}, cfg.seed);
  double forms = 0;
  for (double t : {0.5, 2.0, 10.0}) forms = std::max(forms, j_forms_discrepancy(g, t));
  r.at_most("j_forms_agreement", forms, 1e-8);

  const Fieldd phi = make_datum(DatumKind::gaussian, wide, {}, cfg.seed);
  const double moment = std::sqrt(moment_norm_squared(phi));
  double constancy = 0;
  for (double t : {1.0, 5.0, 10.0})
    constancy = std::max(constancy, std::abs(std::sqrt(norm_squared(apply_J_direct(linear_flow(phi, t), t))) - moment) / moment);
  r.at_most("j_free_flow_constancy", constancy, 1e-8);

  std::mt19937_64 rng(cfg.seed);
  const Gridd box(1, 512, 16.0);
  const Fieldd w = random_smooth_field(box, rng);
  const double t = 0.7;
  Fieldd cubic = w;
  cubic.values.array() *= w.values.array().abs2();
  const Fieldd lhs = apply_J_direct(cubic, t).front();
  const Fieldd jw = apply_J_direct(w, t).front();
  const ComplexArray<double> rhs = 2.0 * w.values.array().abs2() * jw.values.array() -
                                   w.values.array().square() * jw.values.array().conjugate();
  r.at_most("j_derivative_identity",
            (lhs.values.array() - rhs).abs().maxCoeff() / lhs.values.array().abs().maxCoeff(), 1e-10);
  return r.take();
}

std::vector<InvariantResult> norm_checks(const StudyConfig& cfg, double scale) {
  Report r(scale);
  const std::vector<std::pair<int, std::vector<double>>> sigma_grid{{1, {2, 2.5, 3, 4}}, {2, {1, 1.5, 2, 5}}};
  double inadmissible = 0;
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& [d, sigmas] : sigma_grid) {
    for (double s : sigmas) {
      if (!admissible_check(canonical_pair(s, d), d)) inadmissible += 1;
      smallest = std::min(smallest, gamma_exponent(s, d) * delta_of_r(2 * s + 2, d));
    }
  }
  r.at_most("canonical_pair_admissible_failures", inadmissible, 0.0);
  r.above("gamma_delta_minimum", smallest, 1.0);

  const AdmissiblePair p12 = canonical_pair(2, 1), p21 = canonical_pair(1, 2);
  const double exact = std::max({std::abs(p12.q - 6), std::abs(p12.r - 6), std::abs(gamma_exponent(2, 1) - 6),
                                 std::abs(p21.q - 4), std::abs(p21.r - 4), std::abs(gamma_exponent(1, 2) - 4)});
  r.at_most("exponent_reference_values", exact, 0.0);

  const Gridd line(1, 4096, 64.0);
  SchemeParams<double> params = cfg.scheme;
  params.sigma = 2;
  params.tau = 1.0 / 64;
  const auto traj = evolve(make_datum(DatumKind::gaussian, line, {}, cfg.seed), params, 200, 1);
  StrichartzAccumulator sup_mass(AdmissiblePair{}, params.tau);
  for (const auto& u : traj.fields) sup_mass.accumulate(u);
  r.at_most("linf_l2_accumulator_at_start", std::abs(sup_mass.finalize() - std::sqrt(mass(traj.fields.front()))), 0.0);

  const Fieldd coarse = make_datum(DatumKind::gaussian, line, {}, cfg.seed);
  const Fieldd fine = make_datum(DatumKind::gaussian, Gridd(1, 8192, 64.0), {}, cfg.seed);
  double quadrature = 0;
  for (double p : {2.0, 4.0, 6.0, std::numeric_limits<double>::infinity()})
    quadrature = std::max(quadrature, std::abs(lp_norm(coarse, p) - lp_norm(fine, p)) / lp_norm(fine, p));
  r.at_most("quadrature_grid_independence", quadrature, 1e-8);
  return r.take();
}

}  // namespace

std::vector<InvariantResult> run_invariant_suite(const StudyConfig& cfg) {
  const double scale = cfg.tolerance_scale;
  auto spectral = std::async(std::launch::async, [&] { return spectral_checks(cfg, scale); });
  auto flows = std::async(std::launch::async, [&] { return flow_checks(cfg, scale); });
  auto oracle = std::async(std::launch::async, [&] { return oracle_checks(cfg, scale); });
  auto diagnostics = std::async(std::launch::async, [&] { return diagnostic_checks(cfg, scale); });
  Report all(scale);
  all.append(spectral.get());
  all.append(flows.get());
  all.append(oracle.get());
  all.append(diagnostics.get());
  all.append(norm_checks(cfg, scale));
  return all.take();
}

}  // namespace nlsplit
