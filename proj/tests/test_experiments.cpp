#include <doctest.h>

#include "nlsplit/experiments.hpp"
#include "support.hpp"

using namespace nlsplit;
using namespace testing_support;

namespace {

StudyConfig small_config() {
  StudyConfig cfg;
  cfg.grid = Gridd(1, 1024, 32.0);
  cfg.t_final = 1.0;
  cfg.tau_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  return cfg;
}

// sum over the lattice of |xi|^4 <xi>^{-2s}, the squared H^2 seminorm of the
// unwindowed rough spectrum up to a constant
double laplacian_spectral_sum(const Gridd& g, double s) {
  double out = 0;
  for (Eigen::Index j = 0; j < g.points(); ++j) {
    const double xi2 = std::pow(g.wavenumber_1d(j), 2);
    out += xi2 * xi2 * std::pow(1 + xi2, -s);
  }
  return out;
}

}  // namespace

TEST_CASE("datum kinds") {
  const Gridd g(1, 4096, 64.0);
  const Fieldd plain = make_datum(DatumKind::gaussian, g, {}, 1);
  const double half_pi_root = std::sqrt(std::numbers::pi / 2);
  CHECK(sigma_norm(plain) == doctest::Approx(std::sqrt(2.25 * half_pi_root)).epsilon(1e-8));

  DatumParams mod;
  mod.modulation = 3.0;
  const Fieldd moving = make_datum("modulated_gaussian", g, mod, 1);
  CHECK((moving.values.cwiseAbs() - plain.values.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-15);
  // momentum k0 ||phi||^2
  const Fieldd dx = gradient(moving).front();
  const double momentum = g.cell_volume() * (moving.values.conjugate().array() * dx.values.array()).sum().imag();
  CHECK(momentum == doctest::Approx(3.0 * mass(moving)).epsilon(1e-10));

  CHECK(to_string(parse_datum_kind("rough_sobolev")) == "rough_sobolev");
  CHECK_THROWS_AS(parse_datum_kind("square_wave"), UnknownKindError);
  CHECK_THROWS_AS(make_datum("square_wave", g, {}, 1), UnknownKindError);
}

TEST_CASE("rough datum is seeded and rough") {
  const Gridd g(1, 4096, 64.0);
  const Fieldd a = make_datum(DatumKind::rough_sobolev, g, {}, 7);
  const Fieldd b = make_datum(DatumKind::rough_sobolev, g, {}, 7);
  const Fieldd c = make_datum(DatumKind::rough_sobolev, g, {}, 8);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(l2_distance(a, c) > 0.1);
  CHECK(mass(a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(boundary_mass_fraction(a) < 1e-8);

  // refining the lattice on a fixed box adds high modes: H^1 settles, H^2 grows
  double previous_grad = 0, previous_lap = 0, previous_oracle = 0;
  for (Eigen::Index n : {2048, 4096, 8192}) {
    const Gridd gn(1, n, 64.0);
    const Fieldd f = make_datum(DatumKind::rough_sobolev, gn, {}, 7);
    const double grad = gradient_norm_squared(f);
    const Fieldd lap = apply_multiplier(f, [](const Point<double>& xi) { return std::complex<double>(-xi.squaredNorm()); });
    const double lap_norm = std::sqrt(mass(lap));
    const double oracle = std::sqrt(laplacian_spectral_sum(gn, 1.6));
    if (previous_lap > 0) {
      CHECK(lap_norm / previous_lap >= 1.2);
      CHECK(oracle / previous_oracle >= 1.2);
      CHECK(grad / previous_grad < 1.5);
    }
    previous_grad = grad;
    previous_lap = lap_norm;
    previous_oracle = oracle;
  }
}

TEST_CASE("sigma constraint verdicts") {
  CHECK(sigma_constraint_check(2.0, 1).valid);
  const SigmaVerdict low = sigma_constraint_check(0.5, 2);
  CHECK_FALSE(low.valid);
  CHECK_FALSE(low.mass_supercritical);
  CHECK(low.reasons.size() == 2);
  CHECK(sigma_constraint_check(1.0, 2).valid);
  CHECK_FALSE(sigma_constraint_check(1.0, 1).valid);
  const SigmaVerdict high = sigma_constraint_check(3.0, 3);
  CHECK_FALSE(high.energy_subcritical);
  CHECK(sigma_constraint_check(1.5, 3).valid);
}

TEST_CASE("config validation") {
  StudyConfig cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.tau_list = {0.5, 0.5};
  CHECK_THROWS_AS(cfg.validate(), ConstraintError);
  cfg.tau_list = {1.5};
  CHECK_THROWS_AS(cfg.validate(), ConstraintError);
  cfg = small_config();
  cfg.scheme.sigma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConstraintError);
  cfg = small_config();
  cfg.t_final = -1;
  CHECK_THROWS_AS(cfg.validate(), ConstraintError);
}

TEST_CASE("least-squares order fit") {
  const std::vector<double> taus{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errors;
  for (double t : taus) errors.push_back(3.0 * std::pow(t, 0.75));
  CHECK(fit_order(taus, errors) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(fit_order({0.1}, {0.2}), std::invalid_argument);
}

TEST_CASE("convergence study") {
  const StudyConfig cfg = small_config();
  const ConvergenceResult r = run_convergence_study(cfg);
  REQUIRE(r.rows.size() == 4);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].sup_error_l2 >= r.rows[i].final_error_l2);
    CHECK(r.rows[i].n_steps == std::llround(1.0 / r.rows[i].tau));
    if (i > 0) CHECK(r.rows[i].tau < r.rows[i - 1].tau);
  }
  CHECK(r.strictly_decreasing);
  CHECK(r.fitted_order >= 0.45);

  // the reference is built once and can be handed in
  const Trajectory<double> ref = build_reference(cfg, cfg.t_final, sample_spacing(cfg, false), cfg.tau_min());
  CHECK(ref.tau == doctest::Approx(cfg.tau_min() / 16));
  const ConvergenceResult again = run_convergence_study(cfg, ref);
  for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(again.rows[i].sup_error_l2 == r.rows[i].sup_error_l2);

  StudyConfig unsorted = cfg;
  std::reverse(unsorted.tau_list.begin(), unsorted.tau_list.end());
  CHECK(run_convergence_study(unsorted, ref).rows.front().tau == cfg.tau_max());
}

TEST_CASE("filtered and unfiltered errors stay comparable on smooth data") {
  StudyConfig cfg = small_config();
  const ConvergenceResult on = run_convergence_study(cfg);
  cfg.scheme.filter_enabled = false;
  const ConvergenceResult off = run_convergence_study(cfg);
  CHECK(off.strictly_decreasing);
  CHECK(on.rows.back().sup_error_l2 <= 4 * off.rows.back().sup_error_l2);
}

TEST_CASE("convergence study preconditions") {
  StudyConfig cfg = small_config();
  cfg.tau_list = {1.0 / 8, 1.0 / 16, 1.0 / 32};
  CHECK_THROWS_AS(run_convergence_study(cfg), ConstraintError);
  cfg.tau_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 48};
  CHECK_THROWS_AS(run_convergence_study(cfg), ConstraintError);

  cfg = small_config();
  const auto coarse_ref = build_reference(cfg, cfg.t_final, sample_spacing(cfg, false), cfg.tau_max());
  CHECK_THROWS_AS(run_convergence_study(cfg, coarse_ref), ConstraintError);
}

TEST_CASE("boundary leak in a study names the step size") {
  StudyConfig cfg;
  cfg.grid = Gridd(1, 256, 8.0);
  cfg.t_final = 4.0;
  cfg.tau_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  cfg.reference_refinement = 1;
  try {
    run_convergence_study(cfg);
    FAIL("expected BoundaryLeakError");
  } catch (const BoundaryLeakError& e) {
    CHECK(e.tau() > 0);
  }
}

TEST_CASE("uniformity study") {
  StudyConfig cfg;
  cfg.grid = Gridd(1, 2048, 64.0);
  cfg.t_final = 4.0;
  cfg.tau_list = {1.0 / 16};
  const UniformityResult r = run_uniformity_study(cfg);
  REQUIRE(r.rows.size() == 4);
  CHECK(r.rows.front().horizon == 0.5);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].sup_error_filtered >= r.rows[i - 1].sup_error_filtered);
    CHECK(r.rows[i].sup_error_unfiltered >= r.rows[i - 1].sup_error_unfiltered);
  }
  CHECK(r.growth_ratio == doctest::Approx(r.rows[3].sup_error_filtered / r.rows[1].sup_error_filtered));
}

TEST_CASE("decay study") {
  StudyConfig cfg;
  cfg.grid = Gridd(1, 8192, 128.0);
  cfg.t_final = 8.0;
  cfg.tau_list = {1.0 / 16};
  const DecayResult r = run_decay_study(cfg);
  CHECK(r.delta_r0 == doctest::Approx(1.0 / 3));
  CHECK(r.window_start == 1.0);
  CHECK(r.reference.size() == 9);
  CHECK(r.numerical.size() == 9);
  CHECK(r.reference.front().compensated_decay == 0.0);
  CHECK(r.reference_raw_decreasing);
  CHECK(r.reference_spread < 3);
  CHECK(r.numerical_spread < 4);
  for (const auto& row : r.reference) {
    CHECK(row.mass == doctest::Approx(std::sqrt(std::numbers::pi / 2)).epsilon(1e-10));
    CHECK(row.l_r0_norm > 0);
  }
}

TEST_CASE("scattering study") {
  StudyConfig cfg;
  cfg.grid = Gridd(1, 8192, 128.0);
  cfg.t_final = 8.0;
  cfg.tau_list = {1.0 / 16};
  cfg.reference_refinement = 4;

  StudyConfig free = cfg;
  free.linear_only = true;
  const ScatteringResult still = run_scattering_study(free);
  REQUIRE(still.reference.size() == 3);
  for (const auto& row : still.reference) CHECK(row.cauchy_l2 <= 1e-12);
  CHECK(still.numerical.empty());

  const ScatteringResult r = run_scattering_study(cfg);
  REQUIRE(r.reference.size() == 3);
  REQUIRE(r.numerical.size() == 3);
  CHECK(r.reference.back().t == 8.0);
  CHECK(r.reference_cauchy_decreasing);
  CHECK(r.u_plus_error_quarter_tau < r.u_plus_error_tau);
  CHECK(r.u_plus_shrink == doctest::Approx(r.u_plus_error_tau / r.u_plus_error_quarter_tau));
  for (const auto& row : r.reference) CHECK(row.sigma_diff >= row.cauchy_l2);
}

TEST_CASE("single run rows") {
  StudyConfig cfg;
  cfg.grid = Gridd(1, 1024, 32.0);
  cfg.t_final = 2.0;
  cfg.tau_list = {1.0 / 8};
  const auto rows = run_single(cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].t == 1.0);
  CHECK(rows[2].mass <= rows[0].mass);
}

TEST_CASE("studies are deterministic") {
  StudyConfig cfg = small_config();
  cfg.datum = DatumKind::modulated_gaussian;
  const auto a = run_convergence_study(cfg);
  const auto b = run_convergence_study(cfg);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].sup_error_l2 == b.rows[i].sup_error_l2);
    CHECK(a.rows[i].final_error_l2 == b.rows[i].final_error_l2);
  }
}

TEST_CASE("measurement kernels") {
  const Gridd g(1, 2048, 32.0);
  const Fieldd phi = gaussian(g);
  SchemeParams<double> p;
  p.tau = 1.0 / 32;
  CHECK(max_relative_mass_increase(phi, p, 100) <= 1e-12);
  p.filter_enabled = false;
  CHECK(max_relative_mass_drift(phi, p, 100) <= 1e-12);
  CHECK(relative_drift({2.0, 2.5, 1.0}) == 0.5);
  CHECK(relative_drift({0.0, 1e-15}) == doctest::Approx(0.1));
  CHECK(discrete_duhamel_defect(phi, p, 3) <= 1e-10);
  const double order = strang_self_order(phi, 2.0, 1.0 / 16, 1.0);
  CHECK(order > 1.8);
  CHECK(order < 2.2);
  CHECK(j_forms_discrepancy(phi, 2.0) <= 1e-8);
}
