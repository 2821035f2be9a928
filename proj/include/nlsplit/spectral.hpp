#pragma once

// Discrete Fourier machinery on the periodic box.
//
// Normalization: the forward transform is the unnormalized sum, the inverse
// carries 1/N^d. With this choice
//
//   dx^d * sum |f|^2  ==  (dx^d / N^d) * sum |fhat|^2,
//
// and plancherel_constant() returns dx^d / N^d. Every norm in the library is
// computed either in physical space or with this constant.

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <concepts>
#include <mutex>
#include <set>
#include <type_traits>
#include <utility>
#include <vector>

#include "nlsplit/grid.hpp"

namespace nlsplit {

/// Fourier coefficients of a Field, in FFT storage order (see Grid).
template <typename Scalar = double>
struct Spectrum {
  Grid<Scalar> grid;
  ComplexVector<Scalar> coefficients;

  /// Coefficient of integer mode k (d = 1).
  std::complex<Scalar> mode(Eigen::Index k) const { return coefficients(grid.slot_1d(k)); }
  /// Coefficient of integer mode (k0, k1) (d = 2).
  std::complex<Scalar> mode(Eigen::Index k0, Eigen::Index k1) const {
    return coefficients(grid.slot_1d(k0) * grid.points() + grid.slot_1d(k1));
  }
};

namespace detail {

inline std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// One FFT object per thread. Plans are created lazily; the first transform
// of each length runs under a process-wide lock because the FFTW planner is
// not reentrant.
template <typename Scalar>
class TransformEngine {
 public:
  using Complex = std::complex<Scalar>;

  static TransformEngine& local() {
    thread_local TransformEngine engine;
    return engine;
  }

  void forward(Complex* dst, const Complex* src, Eigen::Index n) {
    ensure_planned(n);
    fft_.fwd(dst, src, n);
  }

  void inverse(Complex* dst, const Complex* src, Eigen::Index n) {
    ensure_planned(n);
    fft_.inv(dst, src, n);
  }

  /// Transform of a full field, out of place. `inverse` selects direction.
  void transform(const Grid<Scalar>& grid, Complex* dst, const Complex* src, bool inverse_direction) {
    const Eigen::Index n = grid.points();
    if (grid.dimension() == 1) {
      inverse_direction ? inverse(dst, src, n) : forward(dst, src, n);
      return;
    }
    for (Eigen::Index row = 0; row < n; ++row)
      inverse_direction ? inverse(dst + row * n, src + row * n, n) : forward(dst + row * n, src + row * n, n);
    column_in_.resize(n);
    column_out_.resize(n);
    for (Eigen::Index col = 0; col < n; ++col) {
      for (Eigen::Index row = 0; row < n; ++row) column_in_(row) = dst[row * n + col];
      inverse_direction ? inverse(column_out_.data(), column_in_.data(), n)
                        : forward(column_out_.data(), column_in_.data(), n);
      for (Eigen::Index row = 0; row < n; ++row) dst[row * n + col] = column_out_(row);
    }
  }

 private:
  void ensure_planned(Eigen::Index n) {
    if (planned_.count(n)) return;
    std::lock_guard<std::mutex> lock(plan_mutex());
    ComplexVector<Scalar> a = ComplexVector<Scalar>::Zero(n), b(n);
    fft_.fwd(b.data(), a.data(), n);
    fft_.inv(a.data(), b.data(), n);
    planned_.insert(n);
  }

  Eigen::FFT<Scalar> fft_;
  std::set<Eigen::Index> planned_;
  ComplexVector<Scalar> column_in_, column_out_;
};

}  // namespace detail

template <typename Scalar>
Scalar plancherel_constant(const Grid<Scalar>& grid) {
  return grid.cell_volume() / Scalar(grid.size());
}

template <typename Scalar>
Spectrum<Scalar> forward_transform(const Field<Scalar>& f) {
  Spectrum<Scalar> out{f.grid, ComplexVector<Scalar>(f.values.size())};
  detail::TransformEngine<Scalar>::local().transform(f.grid, out.coefficients.data(), f.values.data(), false);
  return out;
}

template <typename Scalar>
Field<Scalar> inverse_transform(const Spectrum<Scalar>& s) {
  Field<Scalar> out(s.grid);
  detail::TransformEngine<Scalar>::local().transform(s.grid, out.values.data(), s.coefficients.data(), true);
  return out;
}

/// Tabulates a symbol xi -> complex over the spectral slots. The callable
/// receives a Point<Scalar> holding (xi_1, ..., xi_d).
template <typename Scalar, typename Symbol>
ComplexArray<Scalar> symbol_table(const Grid<Scalar>& grid, Symbol&& symbol) {
  ComplexArray<Scalar> table(grid.size());
  for (Eigen::Index n = 0; n < grid.size(); ++n) table(n) = std::complex<Scalar>(symbol(grid.wavevector(n)));
  return table;
}

/// inverse_transform(m * forward_transform(f)) with a tabulated symbol.
template <typename Scalar, typename TableDerived>
Field<Scalar> apply_multiplier(const Field<Scalar>& f, const Eigen::ArrayBase<TableDerived>& table) {
  Spectrum<Scalar> s = forward_transform(f);
  s.coefficients.array() *= table.derived();
  return inverse_transform(s);
}

template <typename Scalar, typename Symbol>
  requires(std::invocable<Symbol, Point<Scalar>> &&
           !std::derived_from<std::remove_cvref_t<Symbol>, Eigen::DenseBase<std::remove_cvref_t<Symbol>>>)
Field<Scalar> apply_multiplier(const Field<Scalar>& f, Symbol&& symbol) {
  return apply_multiplier(f, symbol_table(f.grid, std::forward<Symbol>(symbol)));
}

/// Spectral partial derivatives; component a has symbol i xi_a.
template <typename Scalar>
std::vector<Field<Scalar>> gradient(const Field<Scalar>& f) {
  const std::complex<Scalar> i(0, 1);
  const Spectrum<Scalar> s = forward_transform(f);
  std::vector<Field<Scalar>> out;
  out.reserve(f.grid.dimension());
  for (int a = 0; a < f.grid.dimension(); ++a) {
    Spectrum<Scalar> component{f.grid, s.coefficients};
    component.coefficients.array() *= i * f.grid.wavenumbers(a).template cast<std::complex<Scalar>>();
    out.push_back(inverse_transform(component));
  }
  return out;
}

/// Radial cutoff chi: 1 on the closed unit ball, 0 outside radius 2, with
/// a smoothstep transition of regularity C^k on 1 < |y| < 2:
///
///   chi(y) = 1 - S(|y| - 1),  S(s) = sum_{j=0}^{k} C(k+j, j) C(2k+1, k-j) (-1)^j s^{k+1+j},
///
/// the unique degree 2k+1 polynomial with S(0) = 0, S(1) = 1 and k
/// vanishing derivatives at both ends. The default k = 4 is the degree-9
/// smoothstep.
template <typename Scalar = double>
class CutoffProfile {
 public:
  explicit CutoffProfile(int regularity_order = 4) : order_(regularity_order) {
    if (regularity_order < 1) throw ConstraintError("regularity_order", "must be >= 1");
    const int degree = 2 * order_ + 1;
    coefficients_ = RealArray<Scalar>::Zero(degree + 1);
    for (int j = 0; j <= order_; ++j) {
      const double c = binomial(order_ + j, j) * binomial(2 * order_ + 1, order_ - j);
      coefficients_(order_ + 1 + j) = Scalar((j % 2 == 0) ? c : -c);
    }
    derivative_coefficients_ = RealArray<Scalar>::Zero(degree);
    for (int p = 1; p <= degree; ++p) derivative_coefficients_(p - 1) = Scalar(p) * coefficients_(p);
  }

  int regularity_order() const { return order_; }

  /// Coefficients of S in increasing powers of s.
  const RealArray<Scalar>& transition_coefficients() const { return coefficients_; }
  const RealArray<Scalar>& transition_derivative_coefficients() const { return derivative_coefficients_; }

  /// Admissible regularity for dimension d: k > 1 + d/2.
  bool regular_enough_for(int dimension) const { return Scalar(order_) > Scalar(1) + Scalar(dimension) / Scalar(2); }

  /// chi at radius y >= 0.
  Scalar value(Scalar y) const {
    if (y <= Scalar(1)) return Scalar(1);
    if (y >= Scalar(2)) return Scalar(0);
    const Scalar s = y - Scalar(1);
    // S(s) + S(1 - s) = 1; evaluate the small side directly.
    return s <= Scalar(0.5) ? Scalar(1) - horner(coefficients_, s) : horner(coefficients_, Scalar(1) - s);
  }

  /// d chi / d|y|; zero outside (1, 2).
  Scalar radial_derivative(Scalar y) const {
    if (y <= Scalar(1) || y >= Scalar(2)) return Scalar(0);
    const Scalar s = y - Scalar(1);
    return -horner(derivative_coefficients_, s <= Scalar(0.5) ? s : Scalar(1) - s);
  }

  /// max |grad chi|, attained at |y| = 3/2.
  Scalar max_gradient() const { return -radial_derivative(Scalar(1.5)); }

 private:
  static double binomial(int n, int k) {
    double r = 1;
    for (int j = 1; j <= k; ++j) r = r * double(n - k + j) / double(j);
    return r;
  }

  static Scalar horner(const RealArray<Scalar>& c, Scalar s) {
    Scalar acc(0);
    for (Eigen::Index p = c.size() - 1; p >= 0; --p) acc = acc * s + c(p);
    return acc;
  }

  int order_;
  RealArray<Scalar> coefficients_;
  RealArray<Scalar> derivative_coefficients_;
};

template <typename Scalar>
Scalar chi_eval(Scalar y, const CutoffProfile<Scalar>& chi) {
  return chi.value(y);
}

template <typename Scalar>
Scalar chi_grad_eval(Scalar y, const CutoffProfile<Scalar>& chi) {
  return chi.radial_derivative(y);
}

/// chi(tau^{1/2} |xi|) over the spectral slots.
template <typename Scalar>
RealArray<Scalar> cutoff_symbol(const Grid<Scalar>& grid, Scalar tau, const CutoffProfile<Scalar>& chi) {
  const Scalar scale = std::sqrt(tau);
  const RealArray<Scalar> radius = grid.wavenumber_squared().sqrt();
  RealArray<Scalar> out(grid.size());
  for (Eigen::Index n = 0; n < grid.size(); ++n) out(n) = chi.value(scale * radius(n));
  return out;
}

/// Frequency cutoff Pi_tau.
template <typename Scalar>
Field<Scalar> apply_cutoff(const Field<Scalar>& f, Scalar tau, const CutoffProfile<Scalar>& chi) {
  return apply_multiplier(f, cutoff_symbol(f.grid, tau, chi).template cast<std::complex<Scalar>>());
}

}  // namespace nlsplit
