#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlsplit/spectral.hpp"

namespace nlsplit {

/// Neumaier-compensated running sum.
template <typename Scalar = double>
class CompensatedSum {
 public:
  void add(Scalar v) {
    const Scalar t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      compensation_ += (sum_ - t) + v;
    else
      compensation_ += (v - t) + sum_;
    sum_ = t;
  }
  Scalar value() const { return sum_ + compensation_; }

 private:
  Scalar sum_ = 0;
  Scalar compensation_ = 0;
};

/// (dx^d sum |f|^p)^{1/p}; the lattice maximum for p = inf.
template <typename Scalar>
Scalar lp_norm(const Field<Scalar>& f, Scalar p) {
  if (f.values.size() == 0) return Scalar(0);
  const RealArray<Scalar> modulus = f.values.array().abs();
  if (std::isinf(p)) return modulus.maxCoeff();
  if (p == Scalar(2)) return std::sqrt(f.grid.cell_volume() * f.values.squaredNorm());
  return std::pow(f.grid.cell_volume() * modulus.pow(p).sum(), Scalar(1) / p);
}

/// dx^d sum |f|^p, the p-th power of lp_norm without the root.
template <typename Scalar>
Scalar lp_integral(const Field<Scalar>& f, Scalar p) {
  return f.grid.cell_volume() * f.values.array().abs().pow(p).sum();
}

template <typename Scalar>
Scalar mass(const Field<Scalar>& f) {
  return f.grid.cell_volume() * f.values.squaredNorm();
}

template <typename Scalar>
Scalar gradient_norm_squared(const Field<Scalar>& f) {
  Scalar total(0);
  for (const auto& component : gradient(f)) total += mass(component);
  return total;
}

/// ||x f||^2 with x the physical coordinate samples.
template <typename Scalar>
Scalar moment_norm_squared(const Field<Scalar>& f) {
  return f.grid.cell_volume() * (f.grid.radius_squared() * f.values.array().abs2()).sum();
}

/// ||f||_Sigma = (||f||^2 + ||grad f||^2 + ||x f||^2)^{1/2}.
template <typename Scalar>
Scalar sigma_norm(const Field<Scalar>& f) {
  return std::sqrt(mass(f) + gradient_norm_squared(f) + moment_norm_squared(f));
}

/// E = 1/2 ||grad f||^2 + ||f||_{2s+2}^{2s+2} / (s+1).
template <typename Scalar>
Scalar energy(const Field<Scalar>& f, Scalar sigma) {
  return Scalar(0.5) * gradient_norm_squared(f) + lp_integral(f, Scalar(2) * sigma + Scalar(2)) / (sigma + Scalar(1));
}

/// Fraction of the mass sitting in Grid::boundary_band().
template <typename Scalar>
Scalar boundary_mass_fraction(const Field<Scalar>& f) {
  const Scalar total = f.values.squaredNorm();
  if (total == Scalar(0)) return Scalar(0);
  const auto band = f.grid.boundary_band();
  return band.select(f.values.array().abs2(), Scalar(0)).sum() / total;
}

// ---------------------------------------------------------------------------
// Exponent arithmetic.

/// delta(r) = d (1/2 - 1/r), with 1/inf = 0.
inline double delta_of_r(double r, int dimension) {
  return double(dimension) * (0.5 - (std::isinf(r) ? 0.0 : 1.0 / r));
}

struct AdmissiblePair {
  double q = std::numeric_limits<double>::infinity();
  double r = 2.0;
};

/// (q, r) admissible in dimension d: 2 <= r < 2d/(d-2)_+ (r = inf allowed
/// only for d = 1) and 2/q = delta(r).
inline bool admissible_check(double q, double r, int dimension) {
  if (dimension < 1 || !(r >= 2.0) || !(q > 0.0)) return false;
  if (std::isinf(r) && dimension != 1) return false;
  if (dimension >= 3 && !(r < 2.0 * dimension / (dimension - 2.0))) return false;
  if (dimension == 1 && q < 4.0) return false;
  if (dimension >= 2 && !(q > 2.0)) return false;
  const double lhs = std::isinf(q) ? 0.0 : 2.0 / q;
  const double rhs = delta_of_r(r, dimension);
  return std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs));
}

inline bool admissible_check(const AdmissiblePair& p, int dimension) { return admissible_check(p.q, p.r, dimension); }

/// (q0, r0) = ((4s+4)/(ds), 2s+2).
inline AdmissiblePair canonical_pair(double sigma, int dimension) {
  return {(4.0 * sigma + 4.0) / (dimension * sigma), 2.0 * sigma + 2.0};
}

/// gamma = 4s(s+1) / (2 - (d-2)s), defined by 1/q0' = 1/q0 + 2s/gamma.
inline double gamma_exponent(double sigma, int dimension) {
  return 4.0 * sigma * (sigma + 1.0) / (2.0 - (dimension - 2.0) * sigma);
}

/// Discrete l^q(I; L^r) norm, streamed one time level at a time:
/// (tau sum ||u(n tau)||_{L^r}^q)^{1/q}, or the running sup for q = inf.
/// Ingestion order does not matter up to compensated rounding.
class StrichartzAccumulator {
 public:
  StrichartzAccumulator(AdmissiblePair pair, double tau) : pair_(pair), tau_(tau) {}

  const AdmissiblePair& pair() const { return pair_; }
  double tau() const { return tau_; }

  /// Ingests a precomputed ||u(n tau)||_{L^r} with weight tau.
  void accumulate_norm(double lr_norm) { accumulate_norm(lr_norm, tau_); }

  /// Weighted variant for subsampled trajectories (weight = stride * tau).
  void accumulate_norm(double lr_norm, double weight) {
    ++count_;
    if (std::isinf(pair_.q)) {
      sup_ = std::max(sup_, lr_norm);
    } else {
      sum_.add(weight * std::pow(lr_norm, pair_.q));
    }
  }

  template <typename Scalar>
  void accumulate(const Field<Scalar>& u) {
    accumulate_norm(static_cast<double>(lp_norm(u, Scalar(pair_.r))));
  }

  std::size_t count() const { return count_; }

  double finalize() const {
    if (std::isinf(pair_.q)) return sup_;
    return std::pow(sum_.value(), 1.0 / pair_.q);
  }

 private:
  AdmissiblePair pair_;
  double tau_;
  CompensatedSum<double> sum_;
  double sup_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace nlsplit
