#pragma once

// Diagnostics built on the Galilean vectorfield J(t) = x + i t grad.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "nlsplit/flows.hpp"
#include "nlsplit/norms.hpp"

namespace nlsplit {

template <typename Scalar>
using VectorField = std::vector<Field<Scalar>>;

/// J(t) f, component a = x_a f + i t d_a f.
template <typename Scalar>
VectorField<Scalar> apply_J_direct(const Field<Scalar>& f, Scalar t) {
  const std::complex<Scalar> it(0, t);
  VectorField<Scalar> out = gradient(f);
  for (int a = 0; a < f.grid.dimension(); ++a) {
    out[a].values *= it;
    out[a].values.array() += f.grid.coordinates(a).template cast<std::complex<Scalar>>() * f.values.array();
  }
  return out;
}

/// Largest dx * |x| / |t| on the box; the chirp exp(-i|x|^2/2t) is
/// considered resolved when this is at most pi/4.
template <typename Scalar>
Scalar chirp_sampling_ratio(const Grid<Scalar>& grid, Scalar t) {
  return grid.dx() * grid.half_width() / std::abs(t);
}

/// J(t) f through the factorization i t e^{i|x|^2/2t} grad(e^{-i|x|^2/2t} f).
/// Throws ChirpUnderresolvedError when chirp_sampling_ratio > pi/4.
template <typename Scalar>
VectorField<Scalar> apply_J_factored(const Field<Scalar>& f, Scalar t) {
  if (t == Scalar(0)) throw std::invalid_argument("apply_J_factored: t must be nonzero");
  if (chirp_sampling_ratio(f.grid, t) > Scalar(EIGEN_PI) / Scalar(4))
    throw ChirpUnderresolvedError("chirp exp(-i|x|^2/2t) is not resolved by the lattice at this t");
  const RealArray<Scalar> phase = f.grid.radius_squared() / (Scalar(2) * t);
  ComplexArray<Scalar> chirp(phase.size());
  for (Eigen::Index n = 0; n < phase.size(); ++n) chirp(n) = std::polar(Scalar(1), -phase(n));

  Field<Scalar> g = f;
  g.values.array() *= chirp;
  VectorField<Scalar> out = gradient(g);
  const std::complex<Scalar> it(0, t);
  for (auto& component : out) component.values.array() *= it * chirp.conjugate();
  return out;
}

template <typename Scalar>
struct CommutatorResult {
  VectorField<Scalar> composed;  ///< J(t) Pi_tau f - Pi_tau J(t) f
  VectorField<Scalar> symbol;    ///< from the exact symbol of [J, Pi_tau]
};

/// Symbol of [J(t), Pi_tau] along axis a: i tau^{1/2} (d_a chi)(tau^{1/2} xi).
/// It does not depend on t.
template <typename Scalar>
ComplexArray<Scalar> commutator_symbol(const Grid<Scalar>& grid, int axis, Scalar tau, const CutoffProfile<Scalar>& chi) {
  const Scalar scale = std::sqrt(tau);
  ComplexArray<Scalar> out(grid.size());
  for (Eigen::Index n = 0; n < grid.size(); ++n) {
    const Point<Scalar> xi = grid.wavevector(n);
    const Scalar radius = xi.norm();
    const Scalar d = radius > Scalar(0) ? chi.radial_derivative(scale * radius) * xi(axis) / radius : Scalar(0);
    out(n) = std::complex<Scalar>(0, scale * d);
  }
  return out;
}

/// [J(t), Pi_tau] f computed by composing the operators and from the symbol.
template <typename Scalar>
CommutatorResult<Scalar> commutator_J_cutoff(const Field<Scalar>& f, Scalar t, Scalar tau, const CutoffProfile<Scalar>& chi) {
  CommutatorResult<Scalar> out;
  out.composed = apply_J_direct(apply_cutoff(f, tau, chi), t);
  const VectorField<Scalar> j_first = apply_J_direct(f, t);
  for (int a = 0; a < f.grid.dimension(); ++a) {
    out.composed[a] -= apply_cutoff(j_first[a], tau, chi);
    out.symbol.push_back(apply_multiplier(f, commutator_symbol(f.grid, a, tau, chi)));
  }
  return out;
}

/// sum_a ||v_a||^2.
template <typename Scalar>
Scalar norm_squared(const VectorField<Scalar>& v) {
  Scalar total(0);
  for (const auto& component : v) total += mass(component);
  return total;
}

/// Pointwise Euclidean magnitude |v|(x) = (sum_a |v_a(x)|^2)^{1/2} as a field.
template <typename Scalar>
Field<Scalar> magnitude(const VectorField<Scalar>& v) {
  Field<Scalar> out(v.front().grid);
  RealArray<Scalar> acc = RealArray<Scalar>::Zero(out.values.size());
  for (const auto& component : v) acc += component.values.array().abs2();
  out.values = acc.sqrt().template cast<std::complex<Scalar>>().matrix();
  return out;
}

template <typename Scalar = double>
struct PseudoConformalRecord {
  Scalar time = 0;
  Scalar j_norm_sq = 0;       ///< ||J(t) u||^2
  Scalar potential_term = 0;  ///< t^2/(s+1) ||u||_{2s+2}^{2s+2}
  Scalar total = 0;           ///< j_norm_sq / 2 + potential_term
};

/// P(t) = 1/2 ||J(t)u||^2 + t^2/(s+1) ||u||_{2s+2}^{2s+2}. Along an exact
/// solution dP/dt = t (2 - d s)/(s+1) ||u||_{2s+2}^{2s+2}.
template <typename Scalar>
PseudoConformalRecord<Scalar> pseudoconformal_quantity(const Field<Scalar>& u, Scalar t, Scalar sigma) {
  PseudoConformalRecord<Scalar> r;
  r.time = t;
  r.j_norm_sq = norm_squared(apply_J_direct(u, t));
  r.potential_term = t * t / (sigma + Scalar(1)) * lp_integral(u, Scalar(2) * sigma + Scalar(2));
  r.total = Scalar(0.5) * r.j_norm_sq + r.potential_term;
  return r;
}

/// ||f||_{L^r} |t|^{delta(r)} / (||f||^{1-delta(r)} ||J(t) f||^{delta(r)}).
/// Bounded by a constant C(d, r) for all f and t != 0.
template <typename Scalar>
Scalar weighted_gn_ratio(const Field<Scalar>& f, Scalar t, Scalar r) {
  if (t == Scalar(0)) throw std::invalid_argument("weighted_gn_ratio: t must be nonzero");
  const Scalar delta = Scalar(delta_of_r(double(r), f.grid.dimension()));
  const Scalar l2 = lp_norm(f, Scalar(2));
  const Scalar jnorm = std::sqrt(norm_squared(apply_J_direct(f, t)));
  if (l2 == Scalar(0) || jnorm == Scalar(0)) throw DegenerateDenominatorError("weighted_gn_ratio: zero L2 or J norm");
  if (delta == Scalar(0)) return lp_norm(f, r) / l2;
  return lp_norm(f, r) * std::pow(std::abs(t), delta) / (std::pow(l2, Scalar(1) - delta) * std::pow(jnorm, delta));
}

/// max over A in {1, grad, J} of sup_n ||A(t_n) u(t_n)||_{L^2}.
template <typename Scalar>
Scalar x_norm(const Trajectory<Scalar>& traj) {
  Scalar out(0);
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& u = traj.fields[n];
    out = std::max({out, std::sqrt(mass(u)), std::sqrt(gradient_norm_squared(u)),
                    std::sqrt(norm_squared(apply_J_direct(u, traj.times[n])))});
  }
  return out;
}

/// Per-pair discrete l^q(L^r) norms of A u for A in {1, grad, J} over the
/// checkpoints of a trajectory, each weighted by `weight` (the time spacing
/// of the checkpoints). `value` is the maximum over operators and pairs.
struct YNormReport {
  std::vector<AdmissiblePair> pairs;
  std::vector<std::array<double, 3>> per_pair;  ///< (1, grad, J) per pair
  double value = 0;
};

template <typename Scalar>
YNormReport y_norm(const Trajectory<Scalar>& traj, const std::vector<AdmissiblePair>& pairs, double weight) {
  YNormReport report;
  report.pairs = pairs;
  for (const auto& pair : pairs) {
    std::array<StrichartzAccumulator, 3> acc{StrichartzAccumulator(pair, weight), StrichartzAccumulator(pair, weight),
                                             StrichartzAccumulator(pair, weight)};
    for (std::size_t n = 0; n < traj.size(); ++n) {
      const auto& u = traj.fields[n];
      acc[0].accumulate(u);
      acc[1].accumulate(magnitude(gradient(u)));
      acc[2].accumulate(magnitude(apply_J_direct(u, traj.times[n])));
    }
    std::array<double, 3> values{acc[0].finalize(), acc[1].finalize(), acc[2].finalize()};
    report.per_pair.push_back(values);
    report.value = std::max({report.value, values[0], values[1], values[2]});
  }
  return report;
}

}  // namespace nlsplit
