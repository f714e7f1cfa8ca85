#pragma once

// Pseudo-spectral machinery on the periodic square [0, 2pi)^2.
//
// Real fields are stored row-major with the row index along x2 and the column
// index along x1: value(i2, i1) = f(2 pi i1 / n, 2 pi i2 / n).
// Spectral fields use the FFTW r2c half layout: n rows (k2) by n/2 + 1 columns
// (k1 >= 0), normalized so that f(x) = sum_k c_k e^{i k.x}.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"

namespace gmhd {

using Complex = std::complex<double>;

class SpectralGrid {
 public:
  explicit SpectralGrid(int n) : n_(n), half_(n / 2 + 1) {
    if (n < 4 || n % 2 != 0) {
      throw Error(errc::rejected_odd_n, "grid size must be even and >= 4, got " + std::to_string(n));
    }
    std::vector<double> real(static_cast<std::size_t>(n) * n);
    std::vector<Complex> spec(static_cast<std::size_t>(n) * half_);
    auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
    // Planning is not thread-safe in FFTW; execution with new-array calls is.
    std::lock_guard<std::mutex> lock(planner_mutex());
    constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_2d(n, n, real.data(), cplx, kFlags);
    inverse_ = fftw_plan_dft_c2r_2d(n, n, cplx, real.data(), kFlags);
  }

  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  ~SpectralGrid() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  int n() const { return n_; }
  int half() const { return half_; }
  std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n_) * half_; }
  double length() const { return 2.0 * std::numbers::pi; }
  double dx() const { return length() / n_; }

  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * half_ + col; }
  int k1(int col) const { return col; }
  int k2(int row) const { return row < n_ / 2 ? row : row - n_; }
  std::int64_t ksq(int row, int col) const {
    const std::int64_t a = k1(col);
    const std::int64_t b = k2(row);
    return a * a + b * b;
  }
  bool nyquist(int row, int col) const { return row == n_ / 2 || col == n_ / 2; }

  /// Two-thirds rule: |k1| <= n/3 and |k2| <= n/3, Nyquist modes excluded.
  bool retained(int row, int col) const {
    return !nyquist(row, col) && 3 * std::abs(k1(col)) <= n_ && 3 * std::abs(k2(row)) <= n_;
  }

  /// Parseval weight of a stored mode: columns 1..n/2-1 stand for two modes.
  double weight(int col) const { return (col == 0 || col == n_ / 2) ? 1.0 : 2.0; }

  /// Distinct |k| over the full lattice, ascending (starts with 0).
  std::vector<double> distinct_kappas() const {
    std::vector<std::int64_t> squares;
    for (int row = 0; row < n_; ++row) {
      for (int col = 0; col < half_; ++col) squares.push_back(ksq(row, col));
    }
    std::sort(squares.begin(), squares.end());
    squares.erase(std::unique(squares.begin(), squares.end()), squares.end());
    std::vector<double> kappas;
    kappas.reserve(squares.size());
    for (auto s : squares) kappas.push_back(std::sqrt(static_cast<double>(s)));
    return kappas;
  }

  void execute_forward(const double* in, Complex* out) const {
    fftw_execute_dft_r2c(forward_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
  }
  /// Destroys `in`.
  void execute_inverse(Complex* in, double* out) const {
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in), out);
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  int n_;
  int half_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

inline GridPtr make_grid(int n) { return std::make_shared<const SpectralGrid>(n); }

class RealField {
 public:
  RealField() = default;
  explicit RealField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->real_size(), 0.0) {}

  const GridPtr& grid() const { return grid_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator()(int i2, int i1) { return values_[static_cast<std::size_t>(i2) * grid_->n() + i1]; }
  double operator()(int i2, int i1) const {
    return values_[static_cast<std::size_t>(i2) * grid_->n() + i1];
  }

  /// Samples f(x1, x2) at the grid points.
  template <class F>
  static RealField sample(GridPtr grid, F&& f) {
    RealField out(grid);
    const int n = grid->n();
    const double h = grid->dx();
    for (int i2 = 0; i2 < n; ++i2) {
      for (int i1 = 0; i1 < n; ++i1) out(i2, i1) = f(i1 * h, i2 * h);
    }
    return out;
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(GridPtr grid)
      : grid_(std::move(grid)), coeffs_(grid_->spectral_size(), Complex(0.0, 0.0)) {}

  const GridPtr& grid() const { return grid_; }
  std::vector<Complex>& coeffs() { return coeffs_; }
  const std::vector<Complex>& coeffs() const { return coeffs_; }
  Complex& operator()(int row, int col) { return coeffs_[grid_->index(row, col)]; }
  const Complex& operator()(int row, int col) const { return coeffs_[grid_->index(row, col)]; }

  SpectralField& operator+=(const SpectralField& o) {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  /// Applies f(row, col, coeff) -> coeff to every stored mode.
  template <class F>
  SpectralField& transform(F&& f) {
    const int n = grid_->n();
    const int h = grid_->half();
    for (int row = 0; row < n; ++row) {
      for (int col = 0; col < h; ++col) {
        auto& c = coeffs_[grid_->index(row, col)];
        c = f(row, col, c);
      }
    }
    return *this;
  }

 private:
  GridPtr grid_;
  std::vector<Complex> coeffs_;
};

struct SpectralVector {
  SpectralField x1;
  SpectralField x2;
};

struct RealVector {
  RealField x1;
  RealField x2;
};

// ---------------------------------------------------------------------------
// Transforms

inline SpectralField forward(const RealField& f) {
  SpectralField out(f.grid());
  f.grid()->execute_forward(f.values().data(), out.coeffs().data());
  const double scale = 1.0 / static_cast<double>(f.grid()->real_size());
  for (auto& c : out.coeffs()) c *= scale;
  return out;
}

inline RealField inverse(const SpectralField& f) {
  RealField out(f.grid());
  std::vector<Complex> scratch = f.coeffs();
  f.grid()->execute_inverse(scratch.data(), out.values().data());
  return out;
}

inline RealVector inverse(const SpectralVector& v) { return {inverse(v.x1), inverse(v.x2)}; }
inline SpectralVector forward(const RealVector& v) { return {forward(v.x1), forward(v.x2)}; }

// ---------------------------------------------------------------------------
// Differential and integral operators

/// Derivative along x1 (axis = 1) or x2 (axis = 2); Nyquist modes are zeroed.
inline SpectralField derivative(const SpectralField& s, int axis) {
  SpectralField out = s;
  const auto& g = *s.grid();
  out.transform([&](int row, int col, Complex c) {
    if (g.nyquist(row, col)) return Complex(0.0, 0.0);
    const double k = axis == 1 ? g.k1(col) : g.k2(row);
    return Complex(0.0, k) * c;
  });
  return out;
}

inline SpectralVector gradient(const SpectralField& s) { return {derivative(s, 1), derivative(s, 2)}; }

inline SpectralField laplacian(const SpectralField& s) {
  SpectralField out = s;
  const auto& g = *s.grid();
  out.transform([&](int row, int col, Complex c) {
    if (g.nyquist(row, col)) return Complex(0.0, 0.0);
    return -static_cast<double>(g.ksq(row, col)) * c;
  });
  return out;
}

inline SpectralField divergence(const SpectralVector& v) {
  return derivative(v.x1, 1) + derivative(v.x2, 2);
}

/// omega = d1 v2 - d2 v1.
inline SpectralField curl_2d(const SpectralVector& v) {
  return derivative(v.x2, 1) - derivative(v.x1, 2);
}

inline double max_abs_coeff(const SpectralField& s) {
  double m = 0.0;
  for (const auto& c : s.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

/// Divergence-free u with curl_2d(u) = omega: u_hat = i (k2, -k1) omega_hat / |k|^2.
inline SpectralVector biot_savart(const SpectralField& omega) {
  const auto& g = *omega.grid();
  const double mean = std::abs(omega(0, 0));
  if (mean > 1e-13 * std::max(1.0, max_abs_coeff(omega))) {
    throw Error(errc::non_zero_mean, "Biot-Savart inversion needs a mean-zero field");
  }
  SpectralVector u{SpectralField(omega.grid()), SpectralField(omega.grid())};
  for (int row = 0; row < g.n(); ++row) {
    for (int col = 0; col < g.half(); ++col) {
      const auto ksq = g.ksq(row, col);
      if (ksq == 0 || g.nyquist(row, col)) continue;
      const Complex w = omega(row, col) / static_cast<double>(ksq);
      u.x1(row, col) = Complex(0.0, g.k2(row)) * w;
      u.x2(row, col) = Complex(0.0, -g.k1(col)) * w;
    }
  }
  return u;
}

inline SpectralField dealias(const SpectralField& s) {
  SpectralField out = s;
  const auto& g = *s.grid();
  out.transform([&](int row, int col, Complex c) { return g.retained(row, col) ? c : Complex(0.0, 0.0); });
  return out;
}

inline RealField multiply(const RealField& a, const RealField& b) {
  RealField out(a.grid());
  auto& o = out.values();
  const auto& x = a.values();
  const auto& y = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  return out;
}

/// Real-space product, transformed back and dealiased.
inline SpectralField pointwise_product(const SpectralField& a, const SpectralField& b) {
  return dealias(forward(multiply(inverse(a), inverse(b))));
}

// ---------------------------------------------------------------------------
// Dissipation multiplier

/// sigma(|k|) for every stored mode, looked up from a symbol tabulated on |k|.
inline std::vector<double> mode_multiplier(const SpectralGrid& g, const DissipationSymbol& sym) {
  std::int64_t max_sq = 0;
  for (int row = 0; row < g.n(); ++row) {
    for (int col = 0; col < g.half(); ++col) max_sq = std::max(max_sq, g.ksq(row, col));
  }
  std::vector<double> by_sq(static_cast<std::size_t>(max_sq) + 1, -1.0);
  for (std::size_t i = 0; i < sym.kappas.size(); ++i) {
    const double sq = sym.kappas[i] * sym.kappas[i];
    const auto rounded = static_cast<std::int64_t>(std::llround(sq));
    if (rounded <= max_sq && std::fabs(sq - static_cast<double>(rounded)) < 1e-9 * std::max(1.0, sq)) {
      by_sq[static_cast<std::size_t>(rounded)] = sym.sigmas[i];
    }
  }
  std::vector<double> out(g.spectral_size());
  for (int row = 0; row < g.n(); ++row) {
    for (int col = 0; col < g.half(); ++col) {
      const double v = by_sq[static_cast<std::size_t>(g.ksq(row, col))];
      if (v < 0.0) {
        throw Error(errc::symbol_grid_mismatch,
                    "symbol " + sym.profile_id + " has no value for |k|^2=" +
                        std::to_string(g.ksq(row, col)));
      }
      out[g.index(row, col)] = v;
    }
  }
  return out;
}

/// L s: multiplies each mode by +sigma(|k|).
inline SpectralField apply_symbol(const SpectralField& s, const DissipationSymbol& sym) {
  const auto mult = mode_multiplier(*s.grid(), sym);
  SpectralField out = s;
  auto& c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= mult[i];
  return out;
}

/// sigma on every distinct lattice magnitude of the grid.
inline DissipationSymbol grid_symbol(const KernelProfile& profile, const SpectralGrid& g) {
  return compute_symbol(profile, g.distinct_kappas());
}

/// Identically zero symbol (dissipation switched off).
inline DissipationSymbol zero_symbol(const SpectralGrid& g) {
  DissipationSymbol sym;
  sym.profile_id = "zero";
  sym.kappas = g.distinct_kappas();
  sym.sigmas.assign(sym.kappas.size(), 0.0);
  return sym;
}

// ---------------------------------------------------------------------------
// Norms (torus measure: integral over [0, 2pi)^2)

/// ||f||_{L^2}^2 from the coefficients (Parseval).
inline double l2_norm_sq(const SpectralField& s) {
  const auto& g = *s.grid();
  double sum = 0.0;
  for (int row = 0; row < g.n(); ++row) {
    for (int col = 0; col < g.half(); ++col) sum += g.weight(col) * std::norm(s(row, col));
  }
  return g.length() * g.length() * sum;
}

/// Weighted sum 4 pi^2 sum_k w(k) |c_k|^2 with a per-mode factor.
template <class F>
double weighted_norm_sq(const SpectralField& s, F&& factor) {
  const auto& g = *s.grid();
  double sum = 0.0;
  for (int row = 0; row < g.n(); ++row) {
    for (int col = 0; col < g.half(); ++col) {
      sum += g.weight(col) * factor(row, col) * std::norm(s(row, col));
    }
  }
  return g.length() * g.length() * sum;
}

/// Grid quadrature of |f|^p (p >= 1).
inline double lp_norm(const RealField& f, double p) {
  const double h = f.grid()->dx();
  double sum = 0.0;
  for (double v : f.values()) sum += std::pow(std::fabs(v), p);
  return std::pow(sum * h * h, 1.0 / p);
}

inline double sup_norm(const RealField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::fabs(v));
  return m;
}

/// Grid quadrature of f * g.
inline double inner(const RealField& f, const RealField& g) {
  const double h = f.grid()->dx();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.values().size(); ++i) sum += f.values()[i] * g.values()[i];
  return sum * h * h;
}

/// Pointwise Euclidean magnitude of a vector field.
inline RealField magnitude(const RealVector& v) {
  RealField out(v.x1.grid());
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    out.values()[i] = std::hypot(v.x1.values()[i], v.x2.values()[i]);
  }
  return out;
}

}  // namespace gmhd
