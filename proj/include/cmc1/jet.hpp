#pragma once
/**
 * @file jet.hpp
 * @brief Truncated complex Taylor series (jets) with exact series arithmetic.
 *
 * A Jet stores the Taylor coefficients c[0..N] of an analytic function at a
 * base point: f(base + h) = sum c_k h^k. All arithmetic is exact truncated
 * Cauchy-product arithmetic; elementary functions use the classical
 * power-series recurrences. Division, sqrt, log and tan signal a PoleSignal
 * when their leading coefficient vanishes.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cmc1/errors.hpp"
#include "cmc1/tolerances.hpp"

namespace cmc1 {

class Jet {
 public:
  Jet() : base_(0.0), c_(1, complex(0.0)) {}
  Jet(complex base, int order) : base_(base), c_(order + 1, complex(0.0)) {}
  Jet(complex base, std::vector<complex> coeffs)
      : base_(base), c_(std::move(coeffs)) {
    if (c_.empty()) c_.assign(1, complex(0.0));
  }

  /// Jet of the constant v.
  static Jet constant(complex v, complex base, int order) {
    Jet j(base, order);
    j.c_[0] = v;
    return j;
  }

  /// Jet of the identity variable z at the given base point.
  static Jet variable(complex base, int order) {
    Jet j(base, order);
    j.c_[0] = base;
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  complex base() const { return base_; }
  int order() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<complex>& coeffs() const { return c_; }
  complex operator[](int k) const {
    return k <= order() ? c_[k] : complex(0.0);
  }
  complex& at(int k) { return c_[k]; }

  complex value() const { return c_[0]; }

  /// k-th derivative value f^{(k)}(base) = k! * c_k.
  complex derivative(int k) const {
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return (*this)[k] * fact;
  }

  /// Evaluate the truncated polynomial at base + h (Horner).
  complex eval(complex h) const {
    complex acc = c_.back();
    for (int k = order() - 1; k >= 0; --k) acc = acc * h + c_[k];
    return acc;
  }

  /// Jet of f' (one order lower; order never drops below 0).
  Jet derivative_jet() const {
    const int n = std::max(0, order() - 1);
    Jet out(base_, n);
    for (int k = 0; k <= n; ++k) out.c_[k] = (*this)[k + 1] * double(k + 1);
    return out;
  }

  /// Jet of the antiderivative vanishing at the base point (one order higher).
  Jet antiderivative_jet() const {
    Jet out(base_, order() + 1);
    out.c_[0] = 0.0;
    for (int k = 0; k <= order(); ++k) out.c_[k + 1] = c_[k] / double(k + 1);
    return out;
  }

  /// Truncate/extend to the requested order (extension pads zeros).
  Jet truncated(int n) const {
    Jet out(base_, n);
    for (int k = 0; k <= n; ++k) out.c_[k] = (*this)[k];
    return out;
  }

  /// Re-expand the polynomial at base + h (exact Taylor shift of the
  /// truncated polynomial; used to seed continuation steps).
  Jet shifted(complex h) const {
    const int n = order();
    std::vector<complex> w = c_;
    // Repeated synthetic division: after the loop w holds the coefficients
    // of the polynomial in powers of (x - h).
    for (int j = 0; j < n; ++j)
      for (int k = n - 1; k >= j; --k) w[k] += h * w[k + 1];
    return Jet(base_ + h, std::move(w));
  }

  Jet operator-() const {
    Jet out = *this;
    for (auto& v : out.c_) v = -v;
    return out;
  }

 private:
  static int common_order(const Jet& a, const Jet& b) {
    return std::min(a.order(), b.order());
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    const int n = common_order(a, b);
    Jet out(a.base_, n);
    for (int k = 0; k <= n; ++k) out.c_[k] = a[k] + b[k];
    return out;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    const int n = common_order(a, b);
    Jet out(a.base_, n);
    for (int k = 0; k <= n; ++k) out.c_[k] = a[k] - b[k];
    return out;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    const int n = common_order(a, b);
    Jet out(a.base_, n);
    for (int k = 0; k <= n; ++k) {
      complex acc{};
      for (int j = 0; j <= k; ++j) acc += a[j] * b[k - j];
      out.c_[k] = acc;
    }
    return out;
  }
  friend Jet operator+(const Jet& a, complex s) {
    Jet out = a;
    out.c_[0] += s;
    return out;
  }
  friend Jet operator+(complex s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, complex s) { return a + (-s); }
  friend Jet operator-(complex s, const Jet& a) { return (-a) + s; }
  friend Jet operator*(const Jet& a, complex s) {
    Jet out = a;
    for (auto& v : out.c_) v *= s;
    return out;
  }
  friend Jet operator*(complex s, const Jet& a) { return a * s; }
  friend Jet operator/(const Jet& a, complex s) { return a * (1.0 / s); }
  friend Jet operator/(const Jet& a, const Jet& b) { return jet_div(a, b); }

  complex base_;
  std::vector<complex> c_;

  friend Jet jet_div(const Jet& a, const Jet& b);
  friend Jet jet_sqrt(const Jet& u);
  friend Jet jet_exp(const Jet& u);
  friend Jet jet_log(const Jet& u);
};

namespace detail {
inline void require_leading(const Jet& u, const char* op) {
  double scale = 0.0;
  for (int k = 0; k <= u.order(); ++k) scale = std::max(scale, std::abs(u[k]));
  if (scale == 0.0 || std::abs(u[0]) < 1e-13 * scale)
    throw PoleSignal(std::string(op) + ": leading series coefficient vanishes");
}
}  // namespace detail

inline Jet jet_div(const Jet& a, const Jet& b) {
  detail::require_leading(b, "div");
  const int n = std::min(a.order(), b.order());
  Jet out(a.base(), n);
  for (int k = 0; k <= n; ++k) {
    complex acc = a[k];
    for (int j = 1; j <= k; ++j) acc -= b[j] * out.c_[k - j];
    out.c_[k] = acc / b[0];
  }
  return out;
}

inline Jet jet_recip(const Jet& b) {
  return jet_div(Jet::constant(1.0, b.base(), b.order()), b);
}

/// Principal-branch square root continued through the series.
inline Jet jet_sqrt(const Jet& u) {
  detail::require_leading(u, "sqrt");
  const int n = u.order();
  Jet out(u.base(), n);
  out.c_[0] = std::sqrt(u[0]);
  for (int k = 1; k <= n; ++k) {
    complex acc = u[k];
    for (int j = 1; j <= k - 1; ++j) acc -= out.c_[j] * out.c_[k - j];
    out.c_[k] = acc / (2.0 * out.c_[0]);
  }
  return out;
}

inline Jet jet_exp(const Jet& u) {
  const int n = u.order();
  Jet out(u.base(), n);
  out.c_[0] = std::exp(u[0]);
  for (int k = 1; k <= n; ++k) {
    complex acc{};
    for (int j = 1; j <= k; ++j) acc += double(j) * u[j] * out.c_[k - j];
    out.c_[k] = acc / double(k);
  }
  return out;
}

/// Principal-branch logarithm continued through the series.
inline Jet jet_log(const Jet& u) {
  detail::require_leading(u, "log");
  const int n = u.order();
  Jet out(u.base(), n);
  out.c_[0] = std::log(u[0]);
  for (int k = 1; k <= n; ++k) {
    complex acc = double(k) * u[k];
    for (int j = 1; j <= k - 1; ++j) acc -= double(j) * out.c_[j] * u[k - j];
    out.c_[k] = acc / (double(k) * u[0]);
  }
  return out;
}

/// sin and cos share one coupled recurrence; both are entire.
inline void jet_sincos(const Jet& u, Jet& s, Jet& c) {
  const int n = u.order();
  s = Jet(u.base(), n);
  c = Jet(u.base(), n);
  s.at(0) = std::sin(u[0]);
  c.at(0) = std::cos(u[0]);
  for (int k = 1; k <= n; ++k) {
    complex sa{}, ca{};
    for (int j = 1; j <= k; ++j) {
      sa += double(j) * u[j] * c[k - j];
      ca += double(j) * u[j] * s[k - j];
    }
    s.at(k) = sa / double(k);
    c.at(k) = -ca / double(k);
  }
}

inline Jet jet_sin(const Jet& u) {
  Jet s, c;
  jet_sincos(u, s, c);
  return s;
}
inline Jet jet_cos(const Jet& u) {
  Jet s, c;
  jet_sincos(u, s, c);
  return c;
}
inline Jet jet_tan(const Jet& u) {
  Jet s, c;
  jet_sincos(u, s, c);
  return jet_div(s, c);
}

inline void jet_sinhcosh(const Jet& u, Jet& sh, Jet& ch) {
  const int n = u.order();
  sh = Jet(u.base(), n);
  ch = Jet(u.base(), n);
  sh.at(0) = std::sinh(u[0]);
  ch.at(0) = std::cosh(u[0]);
  for (int k = 1; k <= n; ++k) {
    complex sa{}, ca{};
    for (int j = 1; j <= k; ++j) {
      sa += double(j) * u[j] * ch[k - j];
      ca += double(j) * u[j] * sh[k - j];
    }
    sh.at(k) = sa / double(k);
    ch.at(k) = ca / double(k);
  }
}

inline Jet jet_sinh(const Jet& u) {
  Jet s, c;
  jet_sinhcosh(u, s, c);
  return s;
}
inline Jet jet_cosh(const Jet& u) {
  Jet s, c;
  jet_sinhcosh(u, s, c);
  return c;
}
inline Jet jet_tanh(const Jet& u) {
  Jet s, c;
  jet_sinhcosh(u, s, c);
  return jet_div(s, c);
}

/// General power via exp(w log u) (principal branch).
inline Jet jet_pow(const Jet& u, complex w) {
  // Integer exponents avoid the branch cut and work at zeros.
  const double wr = w.real();
  if (w.imag() == 0.0 && wr == std::floor(wr) && std::abs(wr) <= 64) {
    long n = static_cast<long>(wr);
    if (n == 0) return Jet::constant(1.0, u.base(), u.order());
    Jet acc = Jet::constant(1.0, u.base(), u.order());
    Jet p = u;
    long m = std::labs(n);
    while (m > 0) {
      if (m & 1) acc = acc * p;
      p = p * p;
      m >>= 1;
    }
    return n > 0 ? acc : jet_recip(acc);
  }
  return jet_exp(w * jet_log(u));
}

}  // namespace cmc1
