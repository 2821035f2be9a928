#pragma once

#include <complex>
#include <numbers>
#include <random>

#include "nlsplit/nlsplit.hpp"

namespace testing_support {

using nlsplit::Fieldd;
using nlsplit::Gridd;
using nlsplit::Point;

inline Fieldd gaussian(const Gridd& grid, double width = 1.0) {
  return Fieldd::sample(grid, [width](const Point<double>& x) {
    return std::complex<double>(std::exp(-x.squaredNorm() / (width * width)));
  });
}

/// Complex white noise, seeded.
inline Fieldd noise(const Gridd& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Fieldd f(grid);
  for (Eigen::Index n = 0; n < f.values.size(); ++n) f.values(n) = {normal(rng), normal(rng)};
  return f;
}

/// Sum of a few seeded complex Gaussian bumps, well inside the box.
inline Fieldd bumps(const Gridd& grid, std::mt19937_64& rng, int count = 3) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> center(-2.0, 2.0), width(0.6, 1.4), wave(-3.0, 3.0);
  Fieldd f(grid);
  for (int j = 0; j < count; ++j) {
    const std::complex<double> a(normal(rng), normal(rng));
    const double c = center(rng), s = width(rng), k = wave(rng);
    f += Fieldd::sample(grid, [&](const Point<double>& x) {
      return a * std::exp(-(x.array() - c).square().sum() / (2 * s * s)) * std::polar(1.0, k * x(0));
    });
  }
  return f;
}

/// Direct O(N^2) DFT, unnormalized, same sign convention as the library.
inline nlsplit::ComplexVector<double> naive_dft(const nlsplit::ComplexVector<double>& v) {
  const Eigen::Index n = v.size();
  nlsplit::ComplexVector<double> out = nlsplit::ComplexVector<double>::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j) out(k) += v(j) * std::polar(1.0, -2.0 * std::numbers::pi * double(j * k % n) / double(n));
  return out;
}

inline double l2_distance(const Fieldd& a, const Fieldd& b) { return std::sqrt(nlsplit::mass(a - b)); }

}  // namespace testing_support
