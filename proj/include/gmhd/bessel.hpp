#pragma once

// Order-zero Bessel function of the first kind.
//
// |x| <= 17 : power series summed in long double (the largest term at x = 17 is
//             ~5e5, so extended precision keeps the absolute error near 1e-14).
// |x| >  17 : Hankel asymptotic expansion, truncated at its smallest term
//             (~e^{-2x}, below 1e-15 for x > 17).

#include <cmath>
#include <numbers>

#include "error.hpp"

namespace gmhd::bessel {

inline constexpr double kSeriesLimit = 17.0;
inline constexpr double kFirstZero = 2.404825557695772768621631879;

namespace detail {

inline long double j0_series(long double x) {
  const long double q = -0.25L * x * x;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 1; k < 80; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    sum += term;
    if (std::fabs(term) < 1e-22L * (1.0L + std::fabs(sum))) break;
  }
  return sum;
}

inline double j0_asymptotic(double x) {
  // P ~ sum (-1)^k a_{2k} x^{-2k},  Q ~ sum (-1)^k a_{2k+1} x^{-2k-1},
  // a_k = prod_{i=1..k} (2i-1)^2 / (k! 8^k).
  double p = 1.0;
  double q = 0.0;
  double a = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double f = (2.0 * k - 1.0);
    a *= f * f / (8.0 * k * x);
    if (a > prev) break;
    prev = a;
    const double alternating = ((k / 2) % 2 == 0) ? a : -a;
    if (k % 2 == 1) {
      q -= alternating;
    } else {
      p += alternating;
    }
    if (a < 1e-18) break;
  }
  // cos(x - pi/4) and sin(x - pi/4) without rounding the shifted argument.
  const double c = std::cos(x);
  const double s = std::sin(x);
  const double cos_chi = (c + s) * std::numbers::sqrt2 * 0.5;
  const double sin_chi = (s - c) * std::numbers::sqrt2 * 0.5;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cos_chi - q * sin_chi);
}

}  // namespace detail

inline double j0(double x) {
  if (!std::isfinite(x)) throw Error(errc::bessel_eval_failure, "non-finite argument");
  x = std::fabs(x);
  if (x <= kSeriesLimit) return static_cast<double>(detail::j0_series(x));
  return detail::j0_asymptotic(x);
}

/// 1 - J0(x) with full relative accuracy as x -> 0 (leading term x^2/4).
inline double one_minus_j0(double x) {
  if (!std::isfinite(x)) throw Error(errc::bessel_eval_failure, "non-finite argument");
  x = std::fabs(x);
  if (x > 3.0) return 1.0 - j0(x);
  const double q = -0.25 * x * x;
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k < 40; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum -= term;
    if (std::fabs(term) < 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

/// s-th positive zero of J0 (s >= 1). McMahon's expansion, exact first zero.
/// Error ~3e-6 at s = 2, falling like s^-7; used only to place quadrature panels.
inline double zero(int s) {
  if (s <= 1) return kFirstZero;
  const double beta = (s - 0.25) * std::numbers::pi;
  const double b8 = 8.0 * beta;
  const double b8_2 = b8 * b8;
  return beta + 1.0 / b8 - 124.0 / (3.0 * b8 * b8_2) + 120928.0 / (15.0 * b8 * b8_2 * b8_2);
}

}  // namespace gmhd::bessel
