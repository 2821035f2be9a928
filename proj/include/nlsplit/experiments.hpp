#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlsplit/diagnostics.hpp"

namespace nlsplit {

enum class DatumKind { gaussian, modulated_gaussian, rough_sobolev };

std::string to_string(DatumKind kind);
/// Throws UnknownKindError.
DatumKind parse_datum_kind(const std::string& name);

struct DatumParams {
  double modulation = 2.0;      ///< k0 of the modulated Gaussian, along axis 0
  double rough_exponent = 1.6;  ///< spectral decay <xi>^{-s} of the rough datum
};

/// gaussian: exp(-|x|^2); modulated_gaussian: exp(-|x|^2) exp(i k0 x_0);
/// rough_sobolev: inverse transform of <xi>^{-s} e^{i theta(xi)} with
/// seeded per-mode phases, windowed by exp(-|x|^2 / (2 (L/8)^2)) and scaled
/// to unit mass. Phases depend only on (seed, mode), not on N.
Fieldd make_datum(DatumKind kind, const Gridd& grid, const DatumParams& params, std::uint64_t seed);
Fieldd make_datum(const std::string& kind, const Gridd& grid, const DatumParams& params, std::uint64_t seed);

struct StudyConfig {
  Gridd grid{1, 4096, 64.0};
  SchemeParams<double> scheme{};  ///< sigma, filter flag, cutoff; tau comes from tau_list
  DatumKind datum = DatumKind::gaussian;
  DatumParams datum_params{};
  std::uint64_t seed = 1;
  std::vector<double> tau_list{1.0 / 64};
  double t_final = 10.0;
  /// Spacing of error samples in steps of the largest tau; 0 picks 1 for
  /// convergence studies and ceil(1/tau) for long-horizon studies.
  std::int64_t checkpoint_stride = 0;
  int reference_refinement = 16;
  /// Uniformity horizons; empty means {T/8, T/4, T/2, T}.
  std::vector<double> horizons{};
  /// Scattering sample times; empty means {T/8, T/4, T/2, T}.
  std::vector<double> sample_times{};
  /// Drops the nonlinearity in the scattering study (free-flow check).
  bool linear_only = false;
  /// Multiplies every upper bound of the invariant suite.
  double tolerance_scale = 1.0;

  double tau_max() const;
  double tau_min() const;
  std::vector<double> resolved_horizons() const;
  std::vector<double> resolved_sample_times() const;

  /// Throws ConstraintError naming the offending key.
  void validate() const;

  friend bool operator==(const StudyConfig& a, const StudyConfig& b);
};

/// Validity of sigma for dimension d with the reasons that fail.
struct SigmaVerdict {
  bool mass_supercritical = false;  ///< sigma >= 2/d
  bool energy_subcritical = false;  ///< sigma < 2/(d-2)_+
  bool smooth_nonlinearity = false; ///< sigma > 1/2
  bool valid = false;
  std::vector<std::string> reasons;
};

SigmaVerdict sigma_constraint_check(double sigma, int dimension);

// ---------------------------------------------------------------------------

struct ConvergenceRow {
  double tau = 0;
  std::int64_t n_steps = 0;
  double sup_error_l2 = 0;
  double final_error_l2 = 0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;  ///< decreasing tau
  double fitted_order = 0;
  bool largest_tau_excluded = false;
  bool strictly_decreasing = false;
};

/// Strang reference sampled on the error grid of `cfg`, at
/// tau_min / reference_refinement.
Trajectory<double> build_reference(const StudyConfig& cfg, double horizon, double sample_spacing, double tau_min);

/// Error sample spacing of a study: stride * tau_max.
double sample_spacing(const StudyConfig& cfg, bool long_horizon);

ConvergenceResult run_convergence_study(const StudyConfig& cfg);
/// Same, against a reference already sampled at every multiple of
/// sample_spacing(cfg, false) in [0, t_final].
ConvergenceResult run_convergence_study(const StudyConfig& cfg, const Trajectory<double>& reference);

/// Least-squares slope of log(error) against log(tau).
double fit_order(const std::vector<double>& taus, const std::vector<double>& errors);

struct UniformityRow {
  double horizon = 0;
  double sup_error_filtered = 0;
  double sup_error_unfiltered = 0;
};

struct UniformityResult {
  double tau = 0;
  std::vector<UniformityRow> rows;  ///< increasing horizon
  double growth_ratio = 0;          ///< sup(T_max) / sup(T_mid), filtered
};

UniformityResult run_uniformity_study(const StudyConfig& cfg);
UniformityResult run_uniformity_study(const StudyConfig& cfg, const Trajectory<double>& reference);

/// One line of trajectory.csv.
struct TrajectoryRow {
  double t = 0;
  double mass = 0;
  double energy = 0;
  double pseudoconf_total = 0;
  double j_norm_sq = 0;
  double l_r0_norm = 0;
  double compensated_decay = 0;  ///< t^{delta(r0)} ||u||_{L^{r0}}
};

TrajectoryRow trajectory_row(const Fieldd& u, double t, double sigma);

struct DecayResult {
  double delta_r0 = 0;
  double window_start = 0;
  std::vector<TrajectoryRow> reference;  ///< exact-flow surrogate
  std::vector<TrajectoryRow> numerical;  ///< filtered Z_tau at tau_list.front()
  double reference_spread = 0;  ///< max/min of compensated column on the window
  double numerical_spread = 0;
  bool reference_raw_decreasing = false;
};

DecayResult run_decay_study(const StudyConfig& cfg);
DecayResult run_decay_study(const StudyConfig& cfg, const Trajectory<double>& reference);

struct ScatteringRow {
  double t = 0;
  double cauchy_l2 = 0;   ///< ||w(t_k) - w(t_{k-1})||_{L2}, w(t) = S(-t) u(t)
  double sigma_diff = 0;  ///< same difference in the Sigma norm
};

struct ScatteringResult {
  std::vector<ScatteringRow> reference;
  std::vector<ScatteringRow> numerical;  ///< filtered Z_tau at tau_list.front()
  double tau = 0;
  double u_plus_error_tau = 0;          ///< ||w_num(T) - w_ref(T)|| at tau
  double u_plus_error_quarter_tau = 0;  ///< same at tau/4
  double u_plus_shrink = 0;             ///< ratio of the two
  bool reference_cauchy_decreasing = false;
};

ScatteringResult run_scattering_study(const StudyConfig& cfg);
ScatteringResult run_scattering_study(const StudyConfig& cfg, const Trajectory<double>& reference);

/// Row kept by single-run: filtered scheme at tau_list.front() over
/// [0, t_final], one row per checkpoint.
std::vector<TrajectoryRow> run_single(const StudyConfig& cfg);

// ---------------------------------------------------------------------------
// Measurement kernels shared by the invariant suite and the acceptance run.

/// max_n (M(n+1) - M(n)) / M(phi) over n_steps steps of the scheme, where M
/// is the discrete mass. Stepping is in place; no trajectory is stored.
double max_relative_mass_increase(const Fieldd& phi, const SchemeParams<double>& params, std::int64_t n_steps);

/// max_n |M(n) - M(0)| / M(0) over n_steps steps of the scheme.
double max_relative_mass_drift(const Fieldd& phi, const SchemeParams<double>& params, std::int64_t n_steps);

/// max_k |v_k - v_0| / max(|v_0|, 1e-14).
double relative_drift(const std::vector<double>& values);

/// log2 of ||u_h - u_{h/2}|| / ||u_{h/2} - u_{h/4}|| for the Strang flow at
/// time `horizon`.
double strang_self_order(const Fieldd& phi, double sigma, double h, double horizon);

/// ||Pi_tau f - f|| / (tau^{1/2} ||grad f||) for each tau.
std::vector<double> bernstein_ratios(const Fieldd& f, const std::vector<double>& taus, const CutoffProfile<double>& chi);

/// ||composed - symbol|| / ||symbol|| for [J(t), Pi_tau] f.
double commutator_discrepancy(const Fieldd& f, double t, double tau, const CutoffProfile<double>& chi);

/// ||[J(t1), Pi_tau] f - [J(t2), Pi_tau] f|| (composed form).
double commutator_time_spread(const Fieldd& f, double t1, double t2, double tau, const CutoffProfile<double>& chi);

/// ||[J(t), Pi_tau] f|| / (tau^{1/2} max|grad chi| ||f||).
double commutator_bound_ratio(const Fieldd& f, double t, double tau, const CutoffProfile<double>& chi);

/// ||J_direct f - J_factored f|| / ||J_direct f||.
double j_forms_discrepancy(const Fieldd& f, double t);

/// Largest relative defect of the discrete Duhamel identity
/// Z(n) = A^{n-m} Z(m) + sum_{k=m}^{n-1} A^{n-k} (N(tau) - 1) Z(k),
/// A = S_tau(tau), over 0 <= m < n <= n_max.
double discrete_duhamel_defect(const Fieldd& phi, const SchemeParams<double>& params, int n_max);

struct InvariantResult {
  std::string name;
  double measured = 0;
  double bound = 0;
  bool pass = false;
};

/// Every invariant of the core modules, as report entries (no throws for
/// failed checks).
std::vector<InvariantResult> run_invariant_suite(const StudyConfig& cfg);

}  // namespace nlsplit
