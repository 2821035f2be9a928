#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nlsplit/norms.hpp"
#include "nlsplit/spectral.hpp"

namespace nlsplit {

/// Studies abort once more than this fraction of the mass reaches the
/// boundary band of the box.
inline constexpr double kBoundaryMassThreshold = 1e-8;

/// Everything that defines one run of the (filtered) Lie-Trotter scheme.
template <typename Scalar = double>
struct SchemeParams {
  Scalar sigma = 2;
  Scalar tau = Scalar(1) / 64;
  bool filter_enabled = true;
  CutoffProfile<Scalar> chi{};

  /// Checks 2/d <= sigma < 2/(d-2)_+ and 0 < tau < 1.
  void validate(int dimension) const {
    if (!(sigma >= Scalar(2) / Scalar(dimension)))
      throw ConstraintError("sigma", "below the mass-critical exponent 2/d for dimension " + std::to_string(dimension));
    if (dimension >= 3 && !(sigma < Scalar(2) / Scalar(dimension - 2)))
      throw ConstraintError("sigma", "not energy-subcritical");
    if (!(tau > Scalar(0) && tau < Scalar(1))) throw ConstraintError("tau", "must lie in (0, 1)");
    if (!chi.regular_enough_for(dimension))
      throw ConstraintError("regularity_order", "cutoff needs k > 1 + d/2");
  }
};

/// Checkpointed states of one run. Times are strictly increasing and all
/// fields share a grid.
template <typename Scalar = double>
struct Trajectory {
  std::vector<Scalar> times;
  std::vector<std::int64_t> steps;
  std::vector<Field<Scalar>> fields;
  Scalar sigma = 0;
  Scalar tau = 0;
  bool filter_enabled = false;

  std::size_t size() const { return times.size(); }

  /// Index of the checkpoint at time t (matched to 1e-9 relative), or -1.
  std::ptrdiff_t find(Scalar t) const {
    for (std::size_t n = 0; n < times.size(); ++n)
      if (std::abs(times[n] - t) <= Scalar(1e-9) * std::max(Scalar(1), std::abs(t))) return std::ptrdiff_t(n);
    return -1;
  }

  const Field<Scalar>& at(Scalar t) const {
    const auto n = find(t);
    if (n < 0) throw std::out_of_range("Trajectory: no checkpoint at requested time");
    return fields[std::size_t(n)];
  }
};

/// exp(-i t |xi|^2 / 2), times chi(tau^{1/2}|xi|) when a cutoff is given.
template <typename Scalar>
ComplexArray<Scalar> propagator_symbol(const Grid<Scalar>& grid, Scalar t, const CutoffProfile<Scalar>* chi = nullptr,
                                       Scalar tau = Scalar(0)) {
  const RealArray<Scalar> k2 = grid.wavenumber_squared();
  ComplexArray<Scalar> out(grid.size());
  for (Eigen::Index n = 0; n < grid.size(); ++n) out(n) = std::polar(Scalar(1), -t * k2(n) / Scalar(2));
  if (chi != nullptr) out *= cutoff_symbol(grid, tau, *chi).template cast<std::complex<Scalar>>();
  return out;
}

/// N(t) in place: f(x) <- f(x) exp(-i t |f(x)|^{2 sigma}); phase 0 where f = 0.
template <typename Scalar>
void apply_nonlinear_phase(ComplexVector<Scalar>& values, Scalar t, Scalar sigma) {
  for (Eigen::Index n = 0; n < values.size(); ++n) {
    const Scalar a = std::norm(values(n));
    if (a == Scalar(0)) continue;
    const Scalar power = sigma == Scalar(2) ? a * a : (sigma == Scalar(1) ? a : std::pow(a, sigma));
    values(n) *= std::polar(Scalar(1), -t * power);
  }
}

template <typename Scalar>
Field<Scalar> nonlinear_flow(Field<Scalar> f, Scalar t, Scalar sigma) {
  apply_nonlinear_phase(f.values, t, sigma);
  return f;
}

/// S(t) = exp(i t Delta / 2).
template <typename Scalar>
Field<Scalar> linear_flow(const Field<Scalar>& f, Scalar t) {
  return apply_multiplier(f, propagator_symbol(f.grid, t));
}

/// S_tau(t) = S(t) Pi_tau.
template <typename Scalar>
Field<Scalar> filtered_linear_flow(const Field<Scalar>& f, Scalar t, const SchemeParams<Scalar>& params) {
  return apply_multiplier(f, propagator_symbol(f.grid, t, &params.chi, params.tau));
}

/// Repeated application of one splitting step on a fixed grid, with the
/// symbols tabulated once. Not shareable across threads.
template <typename Scalar = double>
class LieTrotterStepper {
 public:
  LieTrotterStepper(const Grid<Scalar>& grid, const SchemeParams<Scalar>& params)
      : grid_(grid),
        params_(params),
        symbol_(params.filter_enabled ? propagator_symbol(grid, params.tau, &params.chi, params.tau)
                                      : propagator_symbol(grid, params.tau)),
        spectrum_(grid.size()) {}

  /// u <- S_tau(tau) N(tau) u (or S(tau) N(tau) u when unfiltered).
  void step(Field<Scalar>& u) {
    auto& engine = detail::TransformEngine<Scalar>::local();
    apply_nonlinear_phase(u.values, params_.tau, params_.sigma);
    engine.transform(grid_, spectrum_.data(), u.values.data(), false);
    spectrum_.array() *= symbol_;
    engine.transform(grid_, u.values.data(), spectrum_.data(), true);
  }

  const SchemeParams<Scalar>& params() const { return params_; }

 private:
  Grid<Scalar> grid_;
  SchemeParams<Scalar> params_;
  ComplexArray<Scalar> symbol_;
  ComplexVector<Scalar> spectrum_;
};

/// One step of the splitting scheme. Throws NonFiniteError on NaN/Inf.
template <typename Scalar>
Field<Scalar> lie_trotter_step(const Field<Scalar>& f, const SchemeParams<Scalar>& params) {
  Field<Scalar> out = f;
  LieTrotterStepper<Scalar>(f.grid, params).step(out);
  if (!out.all_finite()) throw NonFiniteError(1);
  return out;
}

namespace detail {

template <typename Scalar>
void check_boundary(const Field<Scalar>& u, Scalar t, Scalar threshold) {
  const Scalar fraction = boundary_mass_fraction(u);
  if (fraction > threshold) throw BoundaryLeakError(double(t), double(fraction));
}

}  // namespace detail

/// Z_tau(n tau) = (S_tau(tau) N(tau))^n Pi_tau phi when filtered,
/// Z(n tau) = (S(tau) N(tau))^n phi otherwise. Keeps every
/// `checkpoint_stride`-th level, starting with n = 0.
template <typename Scalar>
Trajectory<Scalar> evolve(const Field<Scalar>& f0, const SchemeParams<Scalar>& params, std::int64_t n_steps,
                          std::int64_t checkpoint_stride = 1, Scalar boundary_threshold = Scalar(kBoundaryMassThreshold)) {
  if (n_steps < 0) throw std::invalid_argument("evolve: negative step count");
  if (checkpoint_stride < 1) throw std::invalid_argument("evolve: checkpoint stride must be >= 1");

  Trajectory<Scalar> out;
  out.sigma = params.sigma;
  out.tau = params.tau;
  out.filter_enabled = params.filter_enabled;

  Field<Scalar> u = params.filter_enabled ? apply_cutoff(f0, params.tau, params.chi) : f0;
  auto record = [&](std::int64_t n) {
    const Scalar t = Scalar(n) * params.tau;
    detail::check_boundary(u, t, boundary_threshold);
    out.times.push_back(t);
    out.steps.push_back(n);
    out.fields.push_back(u);
  };

  if (!u.all_finite()) throw NonFiniteError(0);
  record(0);
  LieTrotterStepper<Scalar> stepper(f0.grid, params);
  for (std::int64_t n = 1; n <= n_steps; ++n) {
    stepper.step(u);
    if (!u.all_finite()) throw NonFiniteError(n);
    if (n % checkpoint_stride == 0) record(n);
  }
  return out;
}

/// Second-order Strang reference S(h/2) N(h) S(h/2), unfiltered, sampled at
/// `sample_times` (each a multiple of h within 1e-12, inside [0, t_final]).
template <typename Scalar>
Trajectory<Scalar> strang_reference(const Field<Scalar>& f0, Scalar sigma, Scalar tau_ref, Scalar t_final,
                                    std::vector<Scalar> sample_times,
                                    Scalar boundary_threshold = Scalar(kBoundaryMassThreshold)) {
  if (!(tau_ref > Scalar(0))) throw ConstraintError("tau_ref", "must be positive");
  const std::int64_t n_final = std::llround(t_final / tau_ref);
  if (std::abs(Scalar(n_final) * tau_ref - t_final) > Scalar(1e-12) * std::max(Scalar(1), t_final))
    throw ConstraintError("t_final", "not a multiple of the reference step");

  std::sort(sample_times.begin(), sample_times.end());
  sample_times.erase(std::unique(sample_times.begin(), sample_times.end()), sample_times.end());
  std::vector<std::int64_t> sample_steps;
  for (Scalar s : sample_times) {
    const Scalar ratio = s / tau_ref;
    const std::int64_t k = std::llround(ratio);
    if (std::abs(ratio - Scalar(k)) > Scalar(1e-12) * std::max(Scalar(1), std::abs(ratio)))
      throw ConstraintError("sample_times", "reference step does not divide a sample time");
    if (k < 0 || k > n_final) throw ConstraintError("sample_times", "sample time outside [0, t_final]");
    sample_steps.push_back(k);
  }

  Trajectory<Scalar> out;
  out.sigma = sigma;
  out.tau = tau_ref;
  out.filter_enabled = false;

  const Grid<Scalar>& grid = f0.grid;
  const ComplexArray<Scalar> half = propagator_symbol(grid, tau_ref / Scalar(2));
  const ComplexArray<Scalar> full = propagator_symbol(grid, tau_ref);
  auto& engine = detail::TransformEngine<Scalar>::local();
  ComplexVector<Scalar> spectrum(grid.size());
  auto linear = [&](Field<Scalar>& u, const ComplexArray<Scalar>& symbol) {
    engine.transform(grid, spectrum.data(), u.values.data(), false);
    spectrum.array() *= symbol;
    engine.transform(grid, u.values.data(), spectrum.data(), true);
  };

  std::size_t next = 0;
  Field<Scalar> u = f0;
  auto record_if_sampled = [&](std::int64_t k) {
    while (next < sample_steps.size() && sample_steps[next] == k) {
      const Scalar t = Scalar(k) * tau_ref;
      detail::check_boundary(u, t, boundary_threshold);
      out.times.push_back(t);
      out.steps.push_back(k);
      out.fields.push_back(u);
      ++next;
    }
  };

  if (!u.all_finite()) throw NonFiniteError(0);
  record_if_sampled(0);
  if (n_final == 0) return out;

  linear(u, half);
  for (std::int64_t k = 1; k <= n_final; ++k) {
    apply_nonlinear_phase(u.values, tau_ref, sigma);
    const bool sampled = next < sample_steps.size() && sample_steps[next] == k;
    if (sampled || k == n_final) {
      linear(u, half);
      if (!u.all_finite()) throw NonFiniteError(k);
      record_if_sampled(k);
      if (k < n_final) linear(u, half);
    } else {
      linear(u, full);
      if (!u.all_finite()) throw NonFiniteError(k);
    }
  }
  return out;
}

}  // namespace nlsplit
