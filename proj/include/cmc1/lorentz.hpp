#pragma once
/**
 * @file lorentz.hpp
 * @brief Minkowski 4-space linear algebra, the Hermitian 2x2 model, the
 *        SL(2,C) action, space-form membership and projections.
 *
 * The inner product is the bilinear (unconjugated) form
 *   <u,v> = -u0 v0 + u1 v1 + u2 v2 + u3 v3
 * even for complex vectors, so holomorphic extensions of real identities
 * stay holomorphic.
 */

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include "cmc1/errors.hpp"
#include "cmc1/tolerances.hpp"

namespace cmc1 {

/// Real or complexified Lorentz 4-vector.
template <class T>
struct Vec4 {
  T x0{}, x1{}, x2{}, x3{};

  T& operator[](int i) {
    switch (i) {
      case 0: return x0;
      case 1: return x1;
      case 2: return x2;
      default: return x3;
    }
  }
  const T& operator[](int i) const {
    switch (i) {
      case 0: return x0;
      case 1: return x1;
      case 2: return x2;
      default: return x3;
    }
  }

  friend Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {a.x0 + b.x0, a.x1 + b.x1, a.x2 + b.x2, a.x3 + b.x3};
  }
  friend Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {a.x0 - b.x0, a.x1 - b.x1, a.x2 - b.x2, a.x3 - b.x3};
  }
  friend Vec4 operator*(T s, const Vec4& a) {
    return {s * a.x0, s * a.x1, s * a.x2, s * a.x3};
  }
  friend Vec4 operator*(const Vec4& a, T s) { return s * a; }
  friend Vec4 operator/(const Vec4& a, T s) {
    return {a.x0 / s, a.x1 / s, a.x2 / s, a.x3 / s};
  }
  Vec4 operator-() const { return {-x0, -x1, -x2, -x3}; }
};

using LVec4 = Vec4<double>;
using CVec4 = Vec4<complex>;

inline CVec4 complexify(const LVec4& v) {
  return {complex(v.x0), complex(v.x1), complex(v.x2), complex(v.x3)};
}

inline LVec4 real_part(const CVec4& v) {
  return {v.x0.real(), v.x1.real(), v.x2.real(), v.x3.real()};
}

inline double imag_norm(const CVec4& v) {
  return std::max(std::max(std::abs(v.x0.imag()), std::abs(v.x1.imag())),
                  std::max(std::abs(v.x2.imag()), std::abs(v.x3.imag())));
}

/// Bilinear Lorentz inner product (no conjugation, also for complex input).
template <class T>
inline T lorentz_inner(const Vec4<T>& u, const Vec4<T>& v) {
  return -u.x0 * v.x0 + u.x1 * v.x1 + u.x2 * v.x2 + u.x3 * v.x3;
}

/// Euclidean magnitude, used only for error measures and seam checks.
template <class T>
inline double euclid_norm(const Vec4<T>& u) {
  return std::sqrt(std::norm(complex(u.x0)) + std::norm(complex(u.x1)) +
                   std::norm(complex(u.x2)) + std::norm(complex(u.x3)));
}

/// Hermitian 2x2 matrix [[m11, m12],[conj(m12), m22]] identified with the
/// real vector (x0,x1,x2,x3) via m11 = x0+x3, m22 = x0-x3, m12 = x1+i x2.
struct Herm2 {
  double m11 = 0.0, m22 = 0.0;
  complex m12{};
};

inline Herm2 vec_to_herm(const LVec4& x) {
  return {x.x0 + x.x3, x.x0 - x.x3, complex(x.x1, x.x2)};
}

inline LVec4 herm_to_vec(const Herm2& m) {
  return {(m.m11 + m.m22) / 2.0, m.m12.real(), m.m12.imag(),
          (m.m11 - m.m22) / 2.0};
}

inline double herm_det(const Herm2& m) {
  return m.m11 * m.m22 - std::norm(m.m12);
}

/// Element of SL(2,C): [[a,b],[c,d]] with ad - bc = 1.
struct SL2C {
  complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

  complex det() const { return a * d - b * c; }

  static SL2C identity() { return {}; }

  friend SL2C operator*(const SL2C& p, const SL2C& q) {
    return {p.a * q.a + p.b * q.c, p.a * q.b + p.b * q.d,
            p.c * q.a + p.d * q.c, p.c * q.b + p.d * q.d};
  }

  SL2C inverse() const { return {d, -b, -c, a}; }

  /// True when the matrix is (numerically) in SU(2): a = conj(d), b = -conj(c).
  bool is_su2(double tol = 1e-8) const {
    return std::abs(a - std::conj(d)) <= tol &&
           std::abs(b + std::conj(c)) <= tol && std::abs(det() - 1.0) <= tol;
  }
};

/// Phi . m = Phi m Phi^*; rejects matrices that are not unimodular.
inline Herm2 sl2c_act(const SL2C& f, const Herm2& m,
                      const Tolerances& tol = default_tol()) {
  if (std::abs(f.det() - 1.0) > tol.unimodular)
    throw InvalidArgument("sl2c_act: matrix is not unimodular");
  // P = Phi * M (general complex 2x2), then P * Phi^*.
  const complex m21 = std::conj(m.m12);
  const complex p11 = f.a * m.m11 + f.b * m21;
  const complex p12 = f.a * m.m12 + f.b * m.m22;
  const complex p21 = f.c * m.m11 + f.d * m21;
  const complex p22 = f.c * m.m12 + f.d * m.m22;
  const complex q11 = p11 * std::conj(f.a) + p12 * std::conj(f.b);
  const complex q12 = p11 * std::conj(f.c) + p12 * std::conj(f.d);
  const complex q22 = p21 * std::conj(f.c) + p22 * std::conj(f.d);
  return {q11.real(), q22.real(), q12};
}

/// The isometry of L^4 induced by Phi, as an explicit 4x4 matrix (column k
/// is the image of the k-th basis vector). Lands in SO+(1,3).
inline std::array<std::array<double, 4>, 4> sl2c_to_so13(
    const SL2C& f, const Tolerances& tol = default_tol()) {
  std::array<std::array<double, 4>, 4> A{};
  for (int k = 0; k < 4; ++k) {
    LVec4 e{};
    e[k] = 1.0;
    const LVec4 img = herm_to_vec(sl2c_act(f, vec_to_herm(e), tol));
    for (int r = 0; r < 4; ++r) A[r][k] = img[r];
  }
  return A;
}

template <class T>
inline Vec4<T> apply_so13(const std::array<std::array<double, 4>, 4>& A,
                          const Vec4<T>& v) {
  Vec4<T> out{};
  for (int r = 0; r < 4; ++r) {
    T acc{};
    for (int k = 0; k < 4; ++k) acc += A[r][k] * v[k];
    out[r] = acc;
  }
  return out;
}

/// 4x4 determinant by Laplace expansion along the first row.
template <class T>
inline T det4(const Vec4<T>& r0, const Vec4<T>& r1, const Vec4<T>& r2,
              const Vec4<T>& r3) {
  auto det3 = [](T a, T b, T c, T d, T e, T f, T g, T h, T i) {
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  };
  const Vec4<T>* rows[3] = {&r1, &r2, &r3};
  auto minor3 = [&](int skip) {
    T m[3][3];
    for (int r = 0; r < 3; ++r) {
      int cc = 0;
      for (int c = 0; c < 4; ++c) {
        if (c == skip) continue;
        m[r][cc++] = (*rows[r])[c];
      }
    }
    return det3(m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0],
                m[2][1], m[2][2]);
  };
  return r0[0] * minor3(0) - r0[1] * minor3(1) + r0[2] * minor3(2) -
         r0[3] * minor3(3);
}

/// The vector X with <X, w> = det(u1, u2, u3, w) for every w.
/// Componentwise: -X0 = det(...,e0), X_i = det(...,e_i) for i = 1,2,3.
template <class T>
inline Vec4<T> cross3(const Vec4<T>& u1, const Vec4<T>& u2,
                      const Vec4<T>& u3) {
  Vec4<T> x{};
  for (int k = 0; k < 4; ++k) {
    Vec4<T> e{};
    e[k] = T(1);
    const T d = det4(u1, u2, u3, e);
    x[k] = (k == 0) ? -d : d;
  }
  return x;
}

/// Exterior product anchored at the base point q: u1 ^ u2 = q x u1 x u2.
template <class T>
inline Vec4<T> wedge_at(const Vec4<T>& q, const Vec4<T>& u1,
                        const Vec4<T>& u2) {
  return cross3(q, u1, u2);
}

/// Stereographic projection of the curvature-c space form Q(c)
/// (squared norm 1/c; sphere in R^3 for c > 0, hyperboloid sheet in L^3 for
/// c < 0). Projects from the pole x0 = 1/sigma, sigma = sign(c) sqrt(|c|):
///   pi(x) = (x1 + i x2) / (1 - sigma x0).
/// Returns nullopt for the point at infinity (projection pole).
struct QcPoint {
  double x0 = 0.0, x1 = 0.0, x2 = 0.0;
};

inline double qc_inner(double c, const QcPoint& p, const QcPoint& q) {
  const double sgn = (c > 0) ? 1.0 : -1.0;
  return sgn * p.x0 * q.x0 + p.x1 * q.x1 + p.x2 * q.x2;
}

inline std::optional<complex> stereographic_Qc(
    const QcPoint& p, double c, const Tolerances& tol = default_tol()) {
  if (c == 0.0) throw InvalidArgument("stereographic_Qc: c must be nonzero");
  if (std::abs(qc_inner(c, p, p) - 1.0 / c) > 100 * tol.membership)
    throw InvalidArgument("stereographic_Qc: point is not on Q(c)");
  const double sigma = (c > 0 ? 1.0 : -1.0) * std::sqrt(std::abs(c));
  const double den = 1.0 - sigma * p.x0;
  if (std::abs(den) < 1e-14) return std::nullopt;
  return complex(p.x1, p.x2) / den;
}

/// Inverse of stereographic_Qc; accepts nullopt as the point at infinity.
inline QcPoint stereographic_Qc_inverse(const std::optional<complex>& w,
                                        double c) {
  if (c == 0.0)
    throw InvalidArgument("stereographic_Qc_inverse: c must be nonzero");
  const double r = 1.0 / std::sqrt(std::abs(c));
  const double sigma = (c > 0 ? 1.0 : -1.0) * std::sqrt(std::abs(c));
  if (!w.has_value()) return {1.0 / sigma, 0.0, 0.0};
  const complex ww = *w / r;  // scale-free coordinate
  const double n2 = std::norm(ww);
  if (c > 0) {
    // Unit sphere: pole (1,0,0); south pole (-1,0,0) maps to 0.
    const double x0 = (n2 - 1.0) / (n2 + 1.0);
    const complex xy = 2.0 * ww / (n2 + 1.0);
    return {r * x0, r * xy.real(), r * xy.imag()};
  }
  // Upper hyperboloid sheet (x0 > 0), sigma < 0: 1 + sqrt|c| x0 in denominator.
  if (n2 >= 1.0)
    throw InvalidArgument(
        "stereographic_Qc_inverse: |w| must stay inside the disk for c < 0");
  const double x0 = (1.0 + n2) / (1.0 - n2);
  const complex xy = 2.0 * ww / (1.0 - n2);
  return {r * x0, r * xy.real(), r * xy.imag()};
}

/// H^3 point into the open unit (Poincare) ball: (x1,x2,x3)/(1+x0).
inline std::array<double, 3> poincare_ball(
    const LVec4& x, const Tolerances& tol = default_tol()) {
  if (std::abs(lorentz_inner(x, x) + 1.0) > 1e4 * tol.membership || x.x0 <= 0)
    throw InvalidArgument("poincare_ball: input is not on H^3");
  const double d = 1.0 + x.x0;
  return {x.x1 / d, x.x2 / d, x.x3 / d};
}

/// Quotient of the null ray w w^*: the ideal boundary point w2 / w1
/// (nullopt encodes infinity). Rejects the zero vector.
inline std::optional<complex> ideal_boundary(complex w1, complex w2) {
  if (std::abs(w1) == 0.0 && std::abs(w2) == 0.0)
    throw InvalidArgument("ideal_boundary: zero vector has no direction");
  if (std::abs(w1) == 0.0) return std::nullopt;
  return w2 / w1;
}

/// Membership helpers.
inline bool on_H3(const LVec4& x, double tol = 1e-9) {
  return std::abs(lorentz_inner(x, x) + 1.0) <= tol && x.x0 > 0;
}
inline bool on_S31(const LVec4& x, double tol = 1e-9) {
  return std::abs(lorentz_inner(x, x) - 1.0) <= tol;
}
inline bool on_N3(const LVec4& x, double tol = 1e-9) {
  return std::abs(lorentz_inner(x, x)) <= tol && x.x0 > 0;
}

}  // namespace cmc1
