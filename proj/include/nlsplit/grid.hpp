#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "nlsplit/errors.hpp"

namespace nlsplit {

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using ComplexArray = Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, 1>;

// One lattice wavevector or coordinate; at most two components, no heap.
template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

/// Periodic box [-L, L)^d sampled with N points per axis.
///
/// Samples are stored row-major over axes: the flat index of (i0, i1) is
/// i0 * N + i1, so axis d-1 is contiguous. The Fourier lattice follows the
/// FFT storage order: slot j holds the integer mode k = j for j < N/2 and
/// k = j - N otherwise, with wavenumber xi = (pi / L) k. The mode k = -N/2
/// is the single unpaired one.
template <typename Scalar = double>
class Grid {
 public:
  Grid() = default;

  Grid(int dimension, Eigen::Index points_per_axis, Scalar half_width)
      : dimension_(dimension), points_(points_per_axis), half_width_(half_width) {
    if (dimension != 1 && dimension != 2)
      throw ConstraintError("dimension", "must be 1 or 2, got " + std::to_string(dimension));
    if (points_per_axis < 8 || points_per_axis % 2 != 0)
      throw ConstraintError("points", "must be even and >= 8, got " + std::to_string(points_per_axis));
    if (!(half_width > Scalar(0)) || !std::isfinite(static_cast<double>(half_width)))
      throw ConstraintError("half_width", "must be a positive finite number");
  }

  int dimension() const { return dimension_; }
  Eigen::Index points() const { return points_; }
  Scalar half_width() const { return half_width_; }

  Scalar dx() const { return Scalar(2) * half_width_ / Scalar(points_); }
  Scalar cell_volume() const { return std::pow(dx(), dimension_); }

  Eigen::Index size() const { return dimension_ == 1 ? points_ : points_ * points_; }

  /// Axis index of flat sample `flat` along `axis`.
  Eigen::Index axis_index(Eigen::Index flat, int axis) const {
    if (dimension_ == 1) return flat;
    return axis == 0 ? flat / points_ : flat % points_;
  }

  Scalar coordinate_1d(Eigen::Index i) const { return -half_width_ + Scalar(i) * dx(); }

  Eigen::Index mode_1d(Eigen::Index j) const { return j < points_ / 2 ? j : j - points_; }

  /// Storage slot of integer mode k in [-N/2, N/2).
  Eigen::Index slot_1d(Eigen::Index k) const { return k >= 0 ? k : k + points_; }

  Scalar wavenumber_1d(Eigen::Index j) const {
    return Scalar(EIGEN_PI) / half_width_ * Scalar(mode_1d(j));
  }

  Point<Scalar> coordinate(Eigen::Index flat) const {
    Point<Scalar> x(dimension_);
    for (int a = 0; a < dimension_; ++a) x(a) = coordinate_1d(axis_index(flat, a));
    return x;
  }

  Point<Scalar> wavevector(Eigen::Index flat) const {
    Point<Scalar> xi(dimension_);
    for (int a = 0; a < dimension_; ++a) xi(a) = wavenumber_1d(axis_index(flat, a));
    return xi;
  }

  /// Physical coordinate x_a at every sample.
  RealArray<Scalar> coordinates(int axis) const {
    RealArray<Scalar> out(size());
    for (Eigen::Index n = 0; n < size(); ++n) out(n) = coordinate_1d(axis_index(n, axis));
    return out;
  }

  /// Wavenumber xi_a at every spectral slot.
  RealArray<Scalar> wavenumbers(int axis) const {
    RealArray<Scalar> out(size());
    for (Eigen::Index n = 0; n < size(); ++n) out(n) = wavenumber_1d(axis_index(n, axis));
    return out;
  }

  RealArray<Scalar> radius_squared() const {
    RealArray<Scalar> out = RealArray<Scalar>::Zero(size());
    for (int a = 0; a < dimension_; ++a) out += coordinates(a).square();
    return out;
  }

  RealArray<Scalar> wavenumber_squared() const {
    RealArray<Scalar> out = RealArray<Scalar>::Zero(size());
    for (int a = 0; a < dimension_; ++a) out += wavenumbers(a).square();
    return out;
  }

  /// Samples whose distance to the box boundary, along some axis, is below
  /// dx * ceil(0.05 N).
  Eigen::Array<bool, Eigen::Dynamic, 1> boundary_band() const {
    const Eigen::Index width = static_cast<Eigen::Index>(std::ceil(0.05 * double(points_)));
    Eigen::Array<bool, Eigen::Dynamic, 1> out(size());
    for (Eigen::Index n = 0; n < size(); ++n) {
      bool near = false;
      for (int a = 0; a < dimension_; ++a) {
        const Eigen::Index i = axis_index(n, a);
        near = near || i < width || i >= points_ - width;
      }
      out(n) = near;
    }
    return out;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dimension_ == b.dimension_ && a.points_ == b.points_ && a.half_width_ == b.half_width_;
  }

 private:
  int dimension_ = 1;
  Eigen::Index points_ = 8;
  Scalar half_width_ = Scalar(1);
};

/// Complex samples of a state on a grid, in physical space.
template <typename Scalar = double>
struct Field {
  using Complex = std::complex<Scalar>;

  Grid<Scalar> grid;
  ComplexVector<Scalar> values;

  Field() = default;
  explicit Field(const Grid<Scalar>& g) : grid(g), values(ComplexVector<Scalar>::Zero(g.size())) {}
  Field(const Grid<Scalar>& g, ComplexVector<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw std::invalid_argument("Field: value count does not match the grid");
  }

  /// Samples of a callable x -> complex (x is a Point<Scalar>).
  template <typename Function>
  static Field sample(const Grid<Scalar>& g, Function&& function) {
    Field f(g);
    for (Eigen::Index n = 0; n < g.size(); ++n) f.values(n) = Complex(function(g.coordinate(n)));
    return f;
  }

  bool all_finite() const { return values.allFinite(); }

  Field& operator+=(const Field& other) {
    values += other.values;
    return *this;
  }
  Field& operator-=(const Field& other) {
    values -= other.values;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(const Complex& s, Field a) {
    a.values *= s;
    return a;
  }
};

using Gridd = Grid<double>;
using Fieldd = Field<double>;

}  // namespace nlsplit
