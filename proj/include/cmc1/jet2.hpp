#pragma once
/**
 * @file jet2.hpp
 * @brief Bivariate truncated Taylor series in (z, w) for surface fields.
 *
 * Holomorphic extensions of real-analytic surface quantities live on the
 * diagonal w = conj(z): phi(z, w), psi(z, w), rho(z, w)... A Jet2 stores
 * coefficients c[i][j] of (z - z0)^i (w - w0)^j up to rectangular orders
 * (nz, nw). Partial derivatives are coefficient reads; products are 2-D
 * Cauchy convolutions. Mixed objects are assembled from univariate jets via
 * outer products, so all partials stay spectrally exact.
 */

#include <vector>

#include "cmc1/errors.hpp"
#include "cmc1/jet.hpp"
#include "cmc1/tolerances.hpp"

namespace cmc1 {

class Jet2 {
 public:
  Jet2() : nz_(0), nw_(0), c_(1) {}
  Jet2(complex z0, complex w0, int nz, int nw)
      : z0_(z0), w0_(w0), nz_(nz), nw_(nw),
        c_(size_t(nz + 1) * (nw + 1), complex(0.0)) {}

  static Jet2 constant(complex v, complex z0, complex w0, int nz, int nw) {
    Jet2 j(z0, w0, nz, nw);
    j.at(0, 0) = v;
    return j;
  }

  /// Outer product f(z) * g(w) from univariate jets.
  static Jet2 outer(const Jet& fz, const Jet& gw, int nz, int nw) {
    Jet2 j(fz.base(), gw.base(), nz, nw);
    for (int i = 0; i <= nz; ++i)
      for (int k = 0; k <= nw; ++k) j.at(i, k) = fz[i] * gw[k];
    return j;
  }

  /// Lift of a univariate jet in z (constant in w).
  static Jet2 in_z(const Jet& fz, complex w0, int nz, int nw) {
    Jet2 j(fz.base(), w0, nz, nw);
    for (int i = 0; i <= nz; ++i) j.at(i, 0) = fz[i];
    return j;
  }

  /// Lift of a univariate jet in w (constant in z).
  static Jet2 in_w(const Jet& gw, complex z0, int nz, int nw) {
    Jet2 j(z0, gw.base(), nz, nw);
    for (int k = 0; k <= nw; ++k) j.at(0, k) = gw[k];
    return j;
  }

  complex z0() const { return z0_; }
  complex w0() const { return w0_; }
  int nz() const { return nz_; }
  int nw() const { return nw_; }

  complex& at(int i, int j) { return c_[size_t(i) * (nw_ + 1) + j]; }
  complex at(int i, int j) const {
    if (i > nz_ || j > nw_) return complex(0.0);
    return c_[size_t(i) * (nw_ + 1) + j];
  }

  complex value() const { return at(0, 0); }

  /// Mixed partial d^{i+j} f / dz^i dw^j at the base point.
  complex partial(int i, int j) const {
    double f = 1.0;
    for (int k = 2; k <= i; ++k) f *= k;
    for (int k = 2; k <= j; ++k) f *= k;
    return at(i, j) * f;
  }

  Jet2 dz() const {
    Jet2 out(z0_, w0_, std::max(nz_ - 1, 0), nw_);
    for (int i = 0; i <= out.nz_; ++i)
      for (int j = 0; j <= nw_; ++j) out.at(i, j) = at(i + 1, j) * double(i + 1);
    return out;
  }
  Jet2 dw() const {
    Jet2 out(z0_, w0_, nz_, std::max(nw_ - 1, 0));
    for (int i = 0; i <= nz_; ++i)
      for (int j = 0; j <= out.nw_; ++j) out.at(i, j) = at(i, j + 1) * double(j + 1);
    return out;
  }

  friend Jet2 operator+(const Jet2& a, const Jet2& b) {
    Jet2 out(a.z0_, a.w0_, std::min(a.nz_, b.nz_), std::min(a.nw_, b.nw_));
    for (int i = 0; i <= out.nz_; ++i)
      for (int j = 0; j <= out.nw_; ++j) out.at(i, j) = a.at(i, j) + b.at(i, j);
    return out;
  }
  friend Jet2 operator-(const Jet2& a, const Jet2& b) {
    Jet2 out(a.z0_, a.w0_, std::min(a.nz_, b.nz_), std::min(a.nw_, b.nw_));
    for (int i = 0; i <= out.nz_; ++i)
      for (int j = 0; j <= out.nw_; ++j) out.at(i, j) = a.at(i, j) - b.at(i, j);
    return out;
  }
  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    Jet2 out(a.z0_, a.w0_, std::min(a.nz_, b.nz_), std::min(a.nw_, b.nw_));
    for (int i = 0; i <= out.nz_; ++i)
      for (int j = 0; j <= out.nw_; ++j) {
        complex acc{};
        for (int p = 0; p <= i; ++p)
          for (int q = 0; q <= j; ++q) acc += a.at(p, q) * b.at(i - p, j - q);
        out.at(i, j) = acc;
      }
    return out;
  }
  friend Jet2 operator*(complex s, const Jet2& a) {
    Jet2 out = a;
    for (auto& v : out.c_) v *= s;
    return out;
  }
  friend Jet2 operator*(const Jet2& a, complex s) { return s * a; }
  friend Jet2 operator+(const Jet2& a, complex s) {
    Jet2 out = a;
    out.at(0, 0) += s;
    return out;
  }
  friend Jet2 operator+(complex s, const Jet2& a) { return a + s; }
  friend Jet2 operator-(const Jet2& a, complex s) { return a + (-s); }
  friend Jet2 operator-(complex s, const Jet2& a) { return (-a) + s; }
  Jet2 operator-() const {
    Jet2 out = *this;
    for (auto& v : out.c_) v = -v;
    return out;
  }

  friend Jet2 jet2_div(const Jet2& a, const Jet2& b);
  friend Jet2 jet2_sqrt(const Jet2& u);

 private:
  complex z0_{}, w0_{};
  int nz_, nw_;
  std::vector<complex> c_;
};

inline Jet2 jet2_div(const Jet2& a, const Jet2& b) {
  double scale = 0.0;
  for (int i = 0; i <= b.nz(); ++i)
    for (int j = 0; j <= b.nw(); ++j)
      scale = std::max(scale, std::abs(b.at(i, j)));
  if (scale == 0.0 || std::abs(b.at(0, 0)) < 1e-13 * scale)
    throw PoleSignal("jet2_div: leading coefficient vanishes");
  Jet2 out(a.z0(), a.w0(), std::min(a.nz(), b.nz()), std::min(a.nw(), b.nw()));
  // Solve a = b * out coefficient-by-coefficient in graded order.
  for (int i = 0; i <= out.nz(); ++i)
    for (int j = 0; j <= out.nw(); ++j) {
      complex acc = a.at(i, j);
      for (int p = 0; p <= i; ++p)
        for (int q = 0; q <= j; ++q) {
          if (p == 0 && q == 0) continue;
          acc -= b.at(p, q) * out.at(i - p, j - q);
        }
      out.at(i, j) = acc / b.at(0, 0);
    }
  return out;
}

/// Principal square root at the leading coefficient, continued through the
/// series; the caller fixes the global branch (sign) separately.
inline Jet2 jet2_sqrt(const Jet2& u) {
  double scale = 0.0;
  for (int i = 0; i <= u.nz(); ++i)
    for (int j = 0; j <= u.nw(); ++j)
      scale = std::max(scale, std::abs(u.at(i, j)));
  if (scale == 0.0 || std::abs(u.at(0, 0)) < 1e-13 * scale)
    throw PoleSignal("jet2_sqrt: leading coefficient vanishes");
  Jet2 out(u.z0(), u.w0(), u.nz(), u.nw());
  out.at(0, 0) = std::sqrt(u.at(0, 0));
  for (int i = 0; i <= u.nz(); ++i)
    for (int j = 0; j <= u.nw(); ++j) {
      if (i == 0 && j == 0) continue;
      complex acc = u.at(i, j);
      for (int p = 0; p <= i; ++p)
        for (int q = 0; q <= j; ++q) {
          if ((p == 0 && q == 0) || (p == i && q == j)) continue;
          acc -= out.at(p, q) * out.at(i - p, j - q);
        }
      out.at(i, j) = acc / (2.0 * out.at(0, 0));
    }
  return out;
}

}  // namespace cmc1
