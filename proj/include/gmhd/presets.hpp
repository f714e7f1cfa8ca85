#pragma once

// Initial data. Velocity and magnetic fields are given in closed form (or as
// band-limited random stream functions) and converted once to (omega, j).

#include <cmath>
#include <cstdint>
#include <random>

#include "dynamics.hpp"
#include "spectral.hpp"

namespace gmhd {

inline SimState state_from_fields(const RealVector& u, const RealVector& b) {
  SimState s;
  s.omega = dealias(curl_2d(forward(u)));
  s.j = dealias(curl_2d(forward(b)));
  s.omega(0, 0) = 0.0;
  s.j(0, 0) = 0.0;
  return s;
}

/// u = A(-sin x2, sin x1), b = A beta (-sin x2, sin 2x1).
inline SimState orszag_tang(const GridPtr& grid, double amplitude = 1.0, double beta = 0.5) {
  using RF = RealField;
  const RealVector u{RF::sample(grid, [&](double, double x2) { return -amplitude * std::sin(x2); }),
                     RF::sample(grid, [&](double x1, double) { return amplitude * std::sin(x1); })};
  const double a = amplitude * beta;
  const RealVector b{RF::sample(grid, [&](double, double x2) { return -a * std::sin(x2); }),
                     RF::sample(grid, [&](double x1, double) { return a * std::sin(2.0 * x1); })};
  return state_from_fields(u, b);
}

/// omega = A sin x1, j = 0.
inline SimState single_mode(const GridPtr& grid, double amplitude = 1.0) {
  SimState s;
  s.omega = forward(RealField::sample(grid, [&](double x1, double) { return amplitude * std::sin(x1); }));
  s.j = SpectralField(grid);
  return s;
}

namespace preset_detail {

// Stream function with standard normal coefficients on k_min <= |k| <= k_max,
// Hermitian on the k1 = 0 column; returned as its vorticity -|k|^2 psi_hat.
inline SpectralField random_vorticity(const GridPtr& grid, std::mt19937_64& rng, int k_min, int k_max) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto& g = *grid;
  SpectralField omega(grid);
  const std::int64_t lo = static_cast<std::int64_t>(k_min) * k_min;
  const std::int64_t hi = static_cast<std::int64_t>(k_max) * k_max;
  for (int row = 0; row < g.n(); ++row) {
    for (int col = 0; col < g.half(); ++col) {
      const auto ksq = g.ksq(row, col);
      if (ksq < lo || ksq > hi || !g.retained(row, col)) continue;
      if (col == 0 && g.k2(row) < 0) continue;  // mirrored below
      const double re = normal(rng);
      const double im = normal(rng);
      omega(row, col) = -static_cast<double>(ksq) * Complex(re, im);
    }
  }
  for (int row = 1; row < g.n() / 2; ++row) omega(g.n() - row, 0) = std::conj(omega(row, 0));
  return omega;
}

}  // namespace preset_detail

/// Independent Gaussian stream functions for u and b on k_min <= |k| <= k_max,
/// each scaled to ||u||_{L^2} = ||b||_{L^2} = amplitude.
inline SimState random_band(const GridPtr& grid, std::uint64_t seed, int k_min = 2, int k_max = 8,
                            double amplitude = 1.0) {
  if (k_min < 1 || k_max < k_min || 3 * k_max > grid->n()) {
    throw Error(errc::invalid_config, "random_band needs 1 <= k_min <= k_max <= n/3");
  }
  std::mt19937_64 rng(seed);
  SimState s;
  s.omega = preset_detail::random_vorticity(grid, rng, k_min, k_max);
  s.j = preset_detail::random_vorticity(grid, rng, k_min, k_max);
  // ||u||^2 = 4 pi^2 sum |omega_hat|^2 / |k|^2.
  auto velocity_norm = [&](const SpectralField& w) {
    return std::sqrt(weighted_norm_sq(w, [&](int row, int col) {
      const auto ksq = grid->ksq(row, col);
      return ksq == 0 ? 0.0 : 1.0 / static_cast<double>(ksq);
    }));
  };
  const double nu = velocity_norm(s.omega);
  const double nb = velocity_norm(s.j);
  if (nu > 0.0) s.omega *= amplitude / nu;
  if (nb > 0.0) s.j *= amplitude / nb;
  return s;
}

}  // namespace gmhd
