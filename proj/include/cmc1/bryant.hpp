#pragma once
/**
 * @file bryant.hpp
 * @brief Björling problem for mean-curvature-one surfaces in hyperbolic
 *        3-space: analytic strip data, hyperbolic and secondary Gauss maps,
 *        Hopf coefficient, null holomorphic lifts, conformal surface
 *        assembly with diagnostics, metric reports, named example families,
 *        associate families, and symmetry / periodicity / closure checks.
 *
 * Conventions.  H^3 = {x in L^4 : <x,x> = -1, x0 > 0} with
 * <x,y> = -x0 y0 + x1 y1 + x2 y2 + x3 y3, identified with hermitian
 * matrices through h(x) = [[x0+x3, x1+i x2], [x1-i x2, x0-x3]].  A surface
 * appears either as psi = F F^* for a holomorphic null lift F in SL(2,C) or
 * through the bivariate hermitian extension of the conformal factor of the
 * modified curvature equation; psi + eta is the null direction whose
 * projective class is the hyperbolic Gauss map G.  Real-analytic curves are
 * carried as 4-tuples of analytic maps, and every derived quantity is
 * assembled jet-wise so s- and t-derivatives stay spectrally exact.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmc1/analytic.hpp"
#include "cmc1/errors.hpp"
#include "cmc1/jet.hpp"
#include "cmc1/jet2.hpp"
#include "cmc1/liouville.hpp"
#include "cmc1/lorentz.hpp"
#include "cmc1/threads.hpp"
#include "cmc1/tolerances.hpp"

namespace cmc1 {

// ---------------------------------------------------------------------------
// Elementary map transforms (jet-level compositions with fixed functions).
// ---------------------------------------------------------------------------

inline AnalyticMap map_cosh(const AnalyticMap& f) {
  return detail::map_lift(f, [](const Jet& j) { return jet_cosh(j); });
}
inline AnalyticMap map_sinh(const AnalyticMap& f) {
  return detail::map_lift(f, [](const Jet& j) { return jet_sinh(j); });
}

// ---------------------------------------------------------------------------
// Jet-valued 4-vector helpers.
// ---------------------------------------------------------------------------

namespace detail {

inline Vec4J vec4j_truncated(const Vec4J& v, int n) {
  return {v[0].truncated(n), v[1].truncated(n), v[2].truncated(n),
          v[3].truncated(n)};
}

inline Vec4J vec4j_derivative(const Vec4J& v) {
  return {v[0].derivative_jet(), v[1].derivative_jet(), v[2].derivative_jet(),
          v[3].derivative_jet()};
}

inline Vec4J vec4j_add(const Vec4J& a, const Vec4J& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}

inline Vec4J vec4j_sub(const Vec4J& a, const Vec4J& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

inline Vec4J vec4j_scale(complex s, const Vec4J& a) {
  return {s * a[0], s * a[1], s * a[2], s * a[3]};
}

/// Jet-valued Minkowski cross product: the vector X with
/// <X, w> = det(u1, u2, u3, w) for all w, written out as the signed 3x3
/// minors of the matrix with rows u1, u2, u3.
inline Vec4J cross3_vec4j(const Vec4J& u1, const Vec4J& u2, const Vec4J& u3) {
  auto minor = [&](int a, int b, int c) {
    return det3_jet({u1[a], u1[b], u1[c]}, {u2[a], u2[b], u2[c]},
                    {u3[a], u3[b], u3[c]});
  };
  return {minor(1, 2, 3), minor(0, 2, 3), -minor(0, 1, 3), minor(0, 1, 2)};
}

inline CVec4 vec4j_value(const Vec4J& v) {
  return {v[0].value(), v[1].value(), v[2].value(), v[3].value()};
}

/// Jet of the reflected map f*(z) = conj(f(conj z)) given the jet of f at
/// conj(z): conjugate the base point and the coefficients.
inline Jet conj_jet(const Jet& j) {
  Jet out(std::conj(j.base()), j.order());
  for (int k = 0; k <= j.order(); ++k) out.at(k) = std::conj(j[k]);
  return out;
}

/// Rebase a jet to a new base point keeping its coefficients (used for
/// parameter-shifted maps, where the caller works in the shifted chart).
inline Jet rebased_jet(const Jet& j, complex new_base) {
  std::vector<complex> c(j.coeffs());
  return Jet(new_base, std::move(c));
}

inline bool finite_cvec(const CVec4& v) {
  for (int k = 0; k < 4; ++k)
    if (!is_finite(v[k])) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Analytic curves in L^4.
// ---------------------------------------------------------------------------

/// Real-analytic curve in Minkowski 4-space held componentwise as analytic
/// maps; evaluation at complex arguments is the holomorphic extension.
class CurveMap {
 public:
  CurveMap() = default;
  CurveMap(AnalyticMap x0, AnalyticMap x1, AnalyticMap x2, AnalyticMap x3)
      : c_{std::move(x0), std::move(x1), std::move(x2), std::move(x3)} {}

  bool valid() const {
    return c_[0].valid() && c_[1].valid() && c_[2].valid() && c_[3].valid();
  }

  const AnalyticMap& component(int i) const { return c_[i]; }

  detail::Vec4J jets(complex z, int order) const {
    return {c_[0].jet(z, order), c_[1].jet(z, order), c_[2].jet(z, order),
            c_[3].jet(z, order)};
  }

  CVec4 value(complex z) const { return detail::vec4j_value(jets(z, 0)); }

  CVec4 derivative(complex z, int k) const {
    const auto j = jets(z, k);
    return {j[0].derivative(k), j[1].derivative(k), j[2].derivative(k),
            j[3].derivative(k)};
  }

  LVec4 real_value(double s) const { return real_part(value(complex(s))); }

 private:
  std::array<AnalyticMap, 4> c_{};
};

/// Componentwise sum of two curves.
inline CurveMap curve_add(const CurveMap& a, const CurveMap& b) {
  return {map_add(a.component(0), b.component(0)),
          map_add(a.component(1), b.component(1)),
          map_add(a.component(2), b.component(2)),
          map_add(a.component(3), b.component(3))};
}

/// Curve transformed by a fixed real 4x4 matrix (componentwise combination).
inline CurveMap curve_apply(const std::array<std::array<double, 4>, 4>& A,
                            const CurveMap& c) {
  std::array<AnalyticMap, 4> out;
  for (int r = 0; r < 4; ++r) {
    const std::array<double, 4> row = A[r];
    const CurveMap cc = c;
    out[r] = AnalyticMap(
        [row, cc](complex z, int n) {
          const auto j = cc.jets(z, n);
          return (complex(row[0]) * j[0] + complex(row[1]) * j[1] +
                  complex(row[2]) * j[2] + complex(row[3]) * j[3])
              .truncated(n);
        },
        {}, false);
  }
  return {out[0], out[1], out[2], out[3]};
}

// ---------------------------------------------------------------------------
// Björling data.
// ---------------------------------------------------------------------------

/// Validated Björling strip: a real-analytic curve beta in H^3 together with
/// a unit normal field V satisfying <V,V> = 1, <beta,V> = 0, <beta',V> = 0,
/// with beta regular (beta' != 0).  An optional period marks closed data.
class BjorlingData {
 public:
  BjorlingData(CurveMap beta, CurveMap v, double s_min, double s_max,
               std::optional<double> period = std::nullopt,
               const Tolerances& tol = default_tol())
      : beta_(std::move(beta)),
        v_(std::move(v)),
        s_min_(s_min),
        s_max_(s_max),
        period_(period) {
    if (!(s_min_ < s_max_))
      throw InvalidArgument("BjorlingData: interval is empty");
    if (!beta_.valid() || !v_.valid())
      throw InvalidArgument("BjorlingData: curve components missing");
    if (period_ && !(*period_ > 0.0))
      throw InvalidArgument("BjorlingData: period must be positive");
    validate(tol);
  }

  const CurveMap& beta() const { return beta_; }
  const CurveMap& v() const { return v_; }
  double s_min() const { return s_min_; }
  double s_max() const { return s_max_; }
  double s0() const { return 0.5 * (s_min_ + s_max_); }
  const std::optional<double>& period() const { return period_; }

  /// Null field nu = beta + V whose projective class is the hyperbolic
  /// Gauss map along the curve.
  CurveMap nu() const { return curve_add(beta_, v_); }

 private:
  void validate(const Tolerances& tol) const {
    const int n = 33;
    for (int i = 0; i < n; ++i) {
      const double s = s_min_ + (s_max_ - s_min_) * i / double(n - 1);
      const auto jb = beta_.jets(complex(s), 1);
      const auto jv = v_.jets(complex(s), 1);
      const CVec4 b = detail::vec4j_value(jb);
      const CVec4 w = detail::vec4j_value(jv);
      const CVec4 bp{jb[0].derivative(1), jb[1].derivative(1),
                     jb[2].derivative(1), jb[3].derivative(1)};
      const double scale =
          std::max(1.0, std::max(euclid_norm(b), euclid_norm(w)));
      const double imag =
          std::max(imag_norm(b), std::max(imag_norm(w), imag_norm(bp)));
      if (imag > 1e-9 * std::max(scale, euclid_norm(bp)))
        throw InvalidArgument("BjorlingData: data is not real on the axis");
      const double tol2 = tol.membership * scale * scale;
      if (std::abs(lorentz_inner(b, b) + complex(1.0)) > tol2)
        throw InvalidArgument("BjorlingData: beta leaves H^3");
      if (b.x0.real() <= 0.0)
        throw InvalidArgument("BjorlingData: beta leaves the upper sheet");
      if (std::abs(lorentz_inner(w, w) - complex(1.0)) > tol2)
        throw InvalidArgument("BjorlingData: V is not a unit field");
      if (std::abs(lorentz_inner(b, w)) > tol2)
        throw InvalidArgument("BjorlingData: V is not normal to beta");
      if (std::abs(lorentz_inner(bp, w)) > tol2 * (1.0 + euclid_norm(bp)))
        throw InvalidArgument("BjorlingData: V is not normal to beta'");
      if (euclid_norm(bp) <= 1e-9 * scale)
        throw DegenerateData("BjorlingData: beta' vanishes on the interval");
    }
    if (period_) {
      for (int i = 0; i < 17; ++i) {
        const double s = s_min_ + (s_max_ - s_min_) * i / 16.0;
        const CVec4 b0 = beta_.value(complex(s));
        const CVec4 b1 = beta_.value(complex(s + *period_));
        const CVec4 w0 = v_.value(complex(s));
        const CVec4 w1 = v_.value(complex(s + *period_));
        const double scale = std::max(1.0, euclid_norm(b0));
        if (euclid_norm(b1 - b0) > 1e-9 * scale ||
            euclid_norm(w1 - w0) > 1e-9 * scale)
          throw InvalidArgument("BjorlingData: data does not match the period");
      }
    }
  }

  CurveMap beta_, v_;
  double s_min_ = 0.0, s_max_ = 0.0;
  std::optional<double> period_;
};

// ---------------------------------------------------------------------------
// Hyperbolic Gauss map.
// ---------------------------------------------------------------------------

/// G = (nu1 - i nu2) / (nu0 + nu3) for nu = beta + V.  The denominator must
/// stay away from zero on the interval; otherwise rotate the data first
/// (normalize_data).
inline AnalyticMap hyperbolic_gauss(const BjorlingData& data,
                                    const Tolerances& tol = default_tol()) {
  (void)tol;
  const CurveMap nu = data.nu();
  double worst = std::numeric_limits<double>::infinity();
  double scale = 1.0;
  for (int i = 0; i < 65; ++i) {
    const double s = data.s_min() + (data.s_max() - data.s_min()) * i / 64.0;
    const CVec4 n = nu.value(complex(s));
    worst = std::min(worst, std::abs(n.x0 + n.x3));
    scale = std::max(scale, euclid_norm(n));
  }
  if (worst < 1e-6 * scale)
    throw DenominatorVanishes(
        "hyperbolic_gauss: nu0 + nu3 vanishes on the interval; rotate the "
        "data with normalize_data first");
  return AnalyticMap(
      [nu](complex z, int n) {
        const auto j = nu.jets(z, n);
        return jet_div(j[1] - complex(0.0, 1.0) * j[2], j[0] + j[3]);
      },
      {}, false);
}

// ---------------------------------------------------------------------------
// SU(2) helpers (rotations fixing the observer point (1,0,0,0)).
// ---------------------------------------------------------------------------

/// SU(2) element of the spatial rotation by `angle` about the unit axis
/// (u1, u2, u3), in the hermitian-matrix convention of this library.
inline SL2C su2_axis_angle(const std::array<double, 3>& axis, double angle) {
  const double len =
      std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (!(len > 0.0))
    throw InvalidArgument("su2_axis_angle: axis must be nonzero");
  const double u1 = axis[0] / len, u2 = axis[1] / len, u3 = axis[2] / len;
  const double ca = std::cos(0.5 * angle), sa = std::sin(0.5 * angle);
  // Quaternion (a,b,c,d) realizing the rotation; in this convention the
  // rotation axis enters as (b, c, d) = sin(angle/2) (u3, -u2, u1).
  const double a = ca, b = sa * u3, c = -sa * u2, d = sa * u1;
  return SL2C{complex(a, b), complex(c, d), complex(-c, d), complex(a, -b)};
}

/// SU(2) element inducing a given 3x3 rotation matrix on the spatial slice
/// (quaternion extraction with pivoting on the largest squared component).
inline SL2C su2_from_rotation(const std::array<std::array<double, 3>, 3>& R) {
  const double ta = 0.25 * (1.0 + R[0][0] + R[1][1] + R[2][2]);
  const double tb = 0.25 * (1.0 - R[0][0] - R[1][1] + R[2][2]);
  const double tc = 0.25 * (1.0 - R[0][0] + R[1][1] - R[2][2]);
  const double td = 0.25 * (1.0 + R[0][0] - R[1][1] - R[2][2]);
  double a, b, c, d;
  if (ta >= tb && ta >= tc && ta >= td) {
    a = std::sqrt(std::max(0.0, ta));
    b = (R[1][0] - R[0][1]) / (4.0 * a);
    c = (R[2][0] - R[0][2]) / (4.0 * a);
    d = (R[2][1] - R[1][2]) / (4.0 * a);
  } else if (tb >= tc && tb >= td) {
    b = std::sqrt(std::max(0.0, tb));
    a = (R[1][0] - R[0][1]) / (4.0 * b);
    c = -(R[2][1] + R[1][2]) / (4.0 * b);
    d = (R[2][0] + R[0][2]) / (4.0 * b);
  } else if (tc >= td) {
    c = std::sqrt(std::max(0.0, tc));
    a = (R[2][0] - R[0][2]) / (4.0 * c);
    b = -(R[2][1] + R[1][2]) / (4.0 * c);
    d = -(R[1][0] + R[0][1]) / (4.0 * c);
  } else {
    d = std::sqrt(std::max(0.0, td));
    a = (R[2][1] - R[1][2]) / (4.0 * d);
    b = (R[2][0] + R[0][2]) / (4.0 * d);
    c = -(R[1][0] + R[0][1]) / (4.0 * d);
  }
  const SL2C u{complex(a, b), complex(c, d), complex(-c, d), complex(a, -b)};
  const auto A = sl2c_to_so13(u);
  double err = 0.0;
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k)
      err = std::max(err, std::abs(A[r + 1][k + 1] - R[r][k]));
  if (err > 1e-6)
    throw InvalidArgument("su2_from_rotation: input is not a rotation matrix");
  return u;
}

// ---------------------------------------------------------------------------
// Data normalization (rotating a bad ideal point away from the curve).
// ---------------------------------------------------------------------------

/// Find a spatial rotation Phi in SU(2) such that the rotated data keeps
/// nu0 + nu3 bounded below by 0.1 * max_s |nu(s)|.  Returns the rotated data
/// together with the rotation used (identity when the input already meets
/// the bound).
inline std::pair<BjorlingData, SL2C> normalize_data(
    const BjorlingData& data, const Tolerances& tol = default_tol()) {
  const CurveMap nu = data.nu();
  const int n = 129;
  std::vector<std::array<double, 3>> dir(n);
  std::vector<double> n0(n);
  double max_norm = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s =
        data.s_min() + (data.s_max() - data.s_min()) * i / double(n - 1);
    const LVec4 v = real_part(nu.value(complex(s)));
    max_norm = std::max(max_norm, euclid_norm(v));
    n0[i] = v.x0;
    const double m = std::sqrt(v.x1 * v.x1 + v.x2 * v.x2 + v.x3 * v.x3);
    if (!(m > 0.0))
      throw DegenerateData("normalize_data: nu has no spatial part");
    dir[i] = {v.x1 / m, v.x2 / m, v.x3 / m};
  }
  // If the pullback of the ideal point -e3 sits at the unit vector p, the
  // rotated denominator is nu0 (1 - <n(s), p>) where n = spatial(nu)/nu0.
  auto margin = [&](const std::array<double, 3>& p) {
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double dot =
          dir[i][0] * p[0] + dir[i][1] * p[1] + dir[i][2] * p[2];
      worst = std::min(worst, n0[i] * (1.0 - dot));
    }
    return worst;
  };
  const std::array<double, 3> ident_p{0.0, 0.0, -1.0};
  const double bound = 0.1 * max_norm;
  if (margin(ident_p) >= bound) return {data, SL2C::identity()};

  // Fibonacci-sphere search for the direction farthest from the image of
  // the unit field n(s).
  std::array<double, 3> best_p = ident_p;
  double best = margin(ident_p);
  const int K = 512;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < K; ++k) {
    const double y = 1.0 - 2.0 * (k + 0.5) / K;
    const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double th = golden * k;
    const std::array<double, 3> p{r * std::cos(th), y, r * std::sin(th)};
    const double m = margin(p);
    if (m > best) {
      best = m;
      best_p = p;
    }
  }
  if (best < bound)
    throw DegenerateData(
        "normalize_data: no spatial rotation achieves the requested margin");
  // Rotation taking best_p to -e3: axis best_p x (-e3), angle acos of dot.
  SL2C rot = SL2C::identity();
  const double dot = -best_p[2];
  if (dot < 1.0 - 1e-15) {
    std::array<double, 3> axis{-best_p[1], best_p[0], 0.0};
    const double alen = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1]);
    if (alen < 1e-12) axis = {1.0, 0.0, 0.0};
    rot = su2_axis_angle(axis, std::acos(std::clamp(dot, -1.0, 1.0)));
  }
  const auto A = sl2c_to_so13(rot, tol);
  BjorlingData rotated(curve_apply(A, data.beta()), curve_apply(A, data.v()),
                       data.s_min(), data.s_max(), data.period(), tol);
  return {std::move(rotated), rot};
}

// ---------------------------------------------------------------------------
// Hopf coefficient and induced Cauchy data.
// ---------------------------------------------------------------------------

/// Hopf coefficient along the strip, analytically extended:
///   q = -1/2 < beta' + V', beta' - i (beta ^ V ^ beta') >.
inline AnalyticMap hopf_q(const BjorlingData& data) {
  const CurveMap beta = data.beta();
  const CurveMap v = data.v();
  return AnalyticMap(
      [beta, v](complex z, int n) {
        const auto jb = beta.jets(z, n + 1);
        const auto jv = v.jets(z, n + 1);
        const auto b = detail::vec4j_truncated(jb, n);
        const auto w = detail::vec4j_truncated(jv, n);
        const auto bp = detail::vec4j_derivative(jb);
        const auto wp = detail::vec4j_derivative(jv);
        const auto wedge = detail::cross3_vec4j(b, w, bp);
        const auto lhs = detail::vec4j_add(bp, wp);
        const auto rhs = detail::vec4j_sub(
            bp, detail::vec4j_scale(complex(0.0, 1.0), wedge));
        return (complex(-0.5) * detail::inner4_jet(lhs, rhs)).truncated(n);
      },
      {}, false);
}

/// Cauchy data of the curvature field of the secondary Gauss map:
///   a = <nu', nu'>,
///   b = <nu'', nu'> + i a [ ((beta^V^nu')_0 + (beta^V^nu')_3)/(nu0+nu3)
///                           + Im(G''/G') ],
/// with Im extended off the axis as (h - h*)/(2i).
inline LiouvilleCauchyData liouville_data(
    const BjorlingData& data, const Tolerances& tol = default_tol()) {
  const CurveMap beta = data.beta();
  const CurveMap v = data.v();
  const CurveMap nu = data.nu();
  const AnalyticMap G = hyperbolic_gauss(data, tol);
  AnalyticMap a(
      [nu](complex z, int n) {
        const auto j = nu.jets(z, n + 1);
        const auto np = detail::vec4j_derivative(j);
        return detail::inner4_jet(np, np).truncated(n);
      },
      {}, true);
  const AnalyticMap G1 = map_derivative(G);
  const AnalyticMap h = map_div(map_derivative(G1), G1);
  const AnalyticMap im_h =
      map_scale(complex(0.0, -0.5), map_sub(h, map_conj(h)));
  AnalyticMap b(
      [beta, v, nu, a, im_h](complex z, int n) {
        const auto jn = nu.jets(z, n + 2);
        const auto np_full = detail::vec4j_derivative(jn);
        const auto npp = detail::vec4j_derivative(np_full);
        const auto np = detail::vec4j_truncated(np_full, n);
        const Jet lead = detail::inner4_jet(npp, np);
        const auto jb = detail::vec4j_truncated(beta.jets(z, n), n);
        const auto jv = detail::vec4j_truncated(v.jets(z, n), n);
        const auto wedge = detail::cross3_vec4j(jb, jv, np);
        const auto nn = detail::vec4j_truncated(jn, n);
        const Jet frac = jet_div(wedge[0] + wedge[3], nn[0] + nn[3]);
        const Jet bracket = frac + im_h.jet(z, n);
        return (lead + complex(0.0, 1.0) * a.jet(z, n) * bracket).truncated(n);
      },
      {}, false);
  return LiouvilleCauchyData::from_b(a, b, 1.0, data.s_min(), data.s_max());
}

/// Boundary data of the conformal factor of the modified equation:
///   v = nu0 + nu3,
///   w = 1/2 ( nu0' + nu3' + i ((beta^V^nu')_0 + (beta^V^nu')_3) ).
inline std::pair<AnalyticMap, AnalyticMap> rho_data(const BjorlingData& data) {
  const CurveMap beta = data.beta();
  const CurveMap vf = data.v();
  const CurveMap nu = data.nu();
  AnalyticMap v(
      [nu](complex z, int n) {
        const auto j = nu.jets(z, n);
        return (j[0] + j[3]).truncated(n);
      },
      {}, true);
  AnalyticMap w(
      [beta, vf, nu](complex z, int n) {
        const auto jn = nu.jets(z, n + 1);
        const auto np = detail::vec4j_derivative(jn);
        const auto jb = detail::vec4j_truncated(beta.jets(z, n), n);
        const auto jv = detail::vec4j_truncated(vf.jets(z, n), n);
        const auto wedge = detail::cross3_vec4j(jb, jv, np);
        return (complex(0.5) *
                (np[0] + np[3] + complex(0.0, 1.0) * (wedge[0] + wedge[3])))
            .truncated(n);
      },
      {}, false);
  return {std::move(v), std::move(w)};
}

// ---------------------------------------------------------------------------
// Secondary Gauss map.
// ---------------------------------------------------------------------------

/// Secondary Gauss map held either as a projective solution pair (generic
/// route, pole-tolerant) or as a closed-form analytic map (g, 1).
class SecondaryGauss {
 public:
  SecondaryGauss() = default;
  explicit SecondaryGauss(ProjectivePair pair) : pair_(std::move(pair)) {
    map_ = pair_->as_map();
  }
  explicit SecondaryGauss(AnalyticMap closed_form)
      : map_(std::move(closed_form)) {}

  bool valid() const { return map_.valid(); }
  bool pair_backed() const { return pair_.has_value(); }

  const ProjectivePair& pair() const {
    if (!pair_)
      throw InvalidArgument("SecondaryGauss: no projective pair stored");
    return *pair_;
  }

  const AnalyticMap& as_map() const { return map_; }

  /// Homogeneous jets (y1, y2) with g = y1/y2; the closed-form flavour
  /// returns (g, 1), the pair flavour marches the underlying solutions.
  std::pair<Jet, Jet> homogeneous_jet(complex z, int order) const {
    if (pair_) return pair_->pair_jet(z, order);
    return {map_.jet(z, order), Jet::constant(1.0, z, order)};
  }

 private:
  std::optional<ProjectivePair> pair_;
  AnalyticMap map_;
};

/// Right-hand side of the lift equation S(g) = S(G) - 2 q_scale q.
inline AnalyticMap schwarzian_rhs(const AnalyticMap& G, const AnalyticMap& q,
                                  complex q_scale = complex(1.0)) {
  return AnalyticMap(
      [G, q, q_scale](complex z, int n) {
        return (schwarzian_jet(G, z, n) - 2.0 * q_scale * q.jet(z, n))
            .truncated(n);
      },
      G.excluded(), false);
}

/// Solve S(g) = S(G) - 2 q with a prescribed 2-jet of g at z0.
inline ProjectivePair umehara_yamada(const AnalyticMap& G,
                                     const AnalyticMap& q, complex z0,
                                     const SchwarzianInit& init,
                                     const Tolerances& tol = default_tol()) {
  return solve_schwarzian(schwarzian_rhs(G, q), z0, init, tol);
}

/// Secondary Gauss map pinned along the axis: its 2-jet at the interval
/// midpoint is the developing map of the induced curvature data (geometric
/// Frenet development), and away from the axis it solves S(g) = S(G) - 2q.
inline ProjectivePair secondary_gauss(const BjorlingData& data,
                                      const Tolerances& tol = default_tol()) {
  const LiouvilleCauchyData ld = liouville_data(data, tol);
  const LiouvilleSolution geo = solve_cauchy_geometric(ld, tol);
  const double s0 = ld.s0();
  const Jet j = geo.developing_map().jet(complex(s0), 2);
  const SchwarzianInit init{j.value(), j.derivative(1), j.derivative(2)};
  const AnalyticMap G = hyperbolic_gauss(data, tol);
  const AnalyticMap q = hopf_q(data);
  return umehara_yamada(G, q, complex(s0), init, tol);
}

// ---------------------------------------------------------------------------
// Null holomorphic lift.
// ---------------------------------------------------------------------------

/// Holomorphic SL(2,C)-valued map given by jets of its entries (row-major
/// F11, F12, F21, F22).  psi = F F^* is insensitive to the sign of F.
class LiftMap {
 public:
  using JetFn = std::function<std::array<Jet, 4>(complex, int)>;

  LiftMap() = default;
  explicit LiftMap(JetFn fn) : fn_(std::make_shared<JetFn>(std::move(fn))) {}

  bool valid() const { return static_cast<bool>(fn_); }

  std::array<Jet, 4> jets(complex z, int order) const {
    if (!fn_) throw InvalidArgument("LiftMap: empty");
    return (*fn_)(z, order);
  }

  SL2C value(complex z) const {
    const auto j = jets(z, 0);
    return {j[0].value(), j[1].value(), j[2].value(), j[3].value()};
  }

  static LiftMap constant(const SL2C& m) {
    return LiftMap([m](complex z, int n) {
      return std::array<Jet, 4>{
          Jet::constant(m.a, z, n), Jet::constant(m.b, z, n),
          Jet::constant(m.c, z, n), Jet::constant(m.d, z, n)};
    });
  }

  /// z -> Phi * F(z).
  LiftMap premultiplied(const SL2C& phi) const {
    const LiftMap base = *this;
    return LiftMap([base, phi](complex z, int n) {
      const auto f = base.jets(z, n);
      return std::array<Jet, 4>{
          phi.a * f[0] + phi.b * f[2], phi.a * f[1] + phi.b * f[3],
          phi.c * f[0] + phi.d * f[2], phi.c * f[1] + phi.d * f[3]};
    });
  }

  /// z -> F(z) * M (constant right factor; used for gauge tests).
  LiftMap postmultiplied(const SL2C& m) const {
    const LiftMap base = *this;
    return LiftMap([base, m](complex z, int n) {
      const auto f = base.jets(z, n);
      return std::array<Jet, 4>{
          m.a * f[0] + m.c * f[1], m.b * f[0] + m.d * f[1],
          m.a * f[2] + m.c * f[3], m.b * f[2] + m.d * f[3]};
    });
  }

 private:
  std::shared_ptr<JetFn> fn_;
};

/// Closed-form null lift from the two Gauss maps, in homogeneous (pole-free)
/// form.  With (y1, y2) projective for g, w = y1' y2 - y1 y2',
/// P = G''/G' and E^2 = -w/G':
///   F11 = (E/2w) (y2 w'/w - 2 y2' - y2 P)
///   F12 = (E/2w) (2 y1' - y1 w'/w + y1 P)
///   F21 = (E/2w) (2 G' y2 + G y2 w'/w - 2 G y2' - G y2 P)
///   F22 = (E/2w) (2 G y1' - 2 G' y1 - G y1 w'/w + G y1 P)
/// so that det F = 1 identically and psi = F F^* is independent of the
/// branch of E.  Throws MaskedSingularity where G' degenerates.
inline LiftMap small_lift(const SecondaryGauss& g, const AnalyticMap& G,
                          const Tolerances& tol = default_tol()) {
  if (!g.valid()) throw InvalidArgument("small_lift: secondary map missing");
  (void)tol;
  const SecondaryGauss gg = g;
  const AnalyticMap GG = G;
  return LiftMap([gg, GG](complex z, int n) -> std::array<Jet, 4> {
    try {
      auto [y1f, y2f] = gg.homogeneous_jet(z, n + 2);
      const Jet y1p_f = y1f.derivative_jet();
      const Jet y2p_f = y2f.derivative_jet();
      const Jet w_f =
          (y1p_f * y2f.truncated(n + 1) - y1f.truncated(n + 1) * y2p_f)
              .truncated(n + 1);
      const Jet wp = w_f.derivative_jet();
      const Jet w = w_f.truncated(n);
      const Jet jG = GG.jet(z, n + 2);
      const Jet G1_f = jG.derivative_jet();
      const Jet G2 = G1_f.derivative_jet();
      const Jet G1 = G1_f.truncated(n);
      const Jet Gn = jG.truncated(n);
      const Jet y1 = y1f.truncated(n), y2 = y2f.truncated(n);
      const Jet y1p = y1p_f.truncated(n), y2p = y2p_f.truncated(n);
      const Jet lw = jet_div(wp, w);
      const Jet P = jet_div(G2, G1);
      const Jet E = complex(0.0, 1.0) * jet_sqrt(jet_div(w, G1));
      const Jet pre = jet_div(complex(0.5) * E, w);
      const Jet f11 = pre * (y2 * lw - 2.0 * y2p - y2 * P);
      const Jet f12 = pre * (2.0 * y1p - y1 * lw + y1 * P);
      const Jet f21 =
          pre * (2.0 * G1 * y2 + Gn * y2 * lw - 2.0 * Gn * y2p - Gn * y2 * P);
      const Jet f22 =
          pre * (2.0 * Gn * y1p - 2.0 * G1 * y1 - Gn * y1 * lw + Gn * y1 * P);
      return {f11.truncated(n), f12.truncated(n), f21.truncated(n),
              f22.truncated(n)};
    } catch (const PoleSignal& e) {
      throw MaskedSingularity(std::string("small_lift: ") + e.what());
    }
  });
}

// ---------------------------------------------------------------------------
// Hermitian-extension core (direct evaluation route).
// ---------------------------------------------------------------------------

namespace detail {

/// Bivariate machinery of the direct construction.  The conformal factor
/// rho of the modified equation is extended to (z, zeta) through the
/// projective pair of its curvature field and assembled into
///   Omega = [[rho + 2 rho_{z zeta}/(rho^2 f fc),  2 rho_z/(rho^2 f)],
///            [2 rho_zeta/(rho^2 fc),              2/rho]]
/// conjugated by [[1,0],[G,1]] on the left and its reflection on the right.
struct OmegaCore {
  ProjectivePair pair;         ///< projective pair of the curvature field
  AnalyticMap a_map, roa_map;  ///< a(zeta) and (b/a)(zeta) of that field
  complex omega0{};            ///< Wronskian normalization of the pair
  AnalyticMap f, fc;           ///< f = G_z and its reflected copy
  AnalyticMap G, Gc;
  double mask_radius = 1e-3;

  /// rho(z, zeta) as a bivariate jet: rho^2 = Phi/(f(z) fc(zeta)) with
  /// Phi = 4 omega0^2 a(zeta)/D^2, D = y2(z) h1(zeta) - y1(z) h2(zeta)
  /// and h_k = 2 y_k' + (b/a) y_k.
  Jet2 rho_jet2(complex z, complex zeta, int nz, int nw) const {
    auto [y1z, y2z] = pair.pair_jet(z, nz);
    auto [y1c, y2c] = pair.pair_jet(zeta, nw + 1);
    const Jet r = roa_map.jet(zeta, nw);
    const Jet h1 = 2.0 * y1c.derivative_jet() + r * y1c.truncated(nw);
    const Jet h2 = 2.0 * y2c.derivative_jet() + r * y2c.truncated(nw);
    const Jet2 D = Jet2::outer(y2z, h1, nz, nw) - Jet2::outer(y1z, h2, nz, nw);
    const Jet2 num =
        (4.0 * omega0 * omega0) * Jet2::in_w(a_map.jet(zeta, nw), z, nz, nw);
    const Jet2 phi2 = jet2_div(num, D * D);
    const Jet2 ffc = Jet2::outer(f.jet(z, nz), fc.jet(zeta, nw), nz, nw);
    return jet2_sqrt(jet2_div(phi2, ffc));
  }

  struct Eval {
    std::array<Jet2, 4> x;  ///< Minkowski components, orders (2,2)
    CVec4 eta{};            ///< normal via N - psi, N = rho (1,Gc;G,GGc)
  };

  Eval eval(complex z, complex zeta) const {
    try {
      return eval_impl(z, zeta);
    } catch (const PoleSignal& e) {
      throw MaskedSingularity(std::string("direct route: ") + e.what());
    } catch (const DenominatorVanishes& e) {
      throw MaskedSingularity(std::string("direct route: ") + e.what());
    }
  }

 private:
  Eval eval_impl(complex z, complex zeta) const {
    const Jet jf = f.jet(z, 3);
    // Proximity mask: Newton distance to the nearest zero of G'.
    {
      const double d1 = std::abs(jf.value());
      const double d2 = std::abs(jf.derivative(1));
      if (d1 == 0.0 || d1 < mask_radius * d2)
        throw MaskedSingularity("direct route: G' vanishes nearby");
    }
    const Jet2 rho = rho_jet2(z, zeta, 3, 3);
    {
      const double r0 = std::abs(rho.value());
      const double r1 =
          std::abs(rho.partial(1, 0)) + std::abs(rho.partial(0, 1));
      if (r0 == 0.0 || r0 < mask_radius * r1)
        throw MaskedSingularity("direct route: rho vanishes nearby");
    }
    const Jet jfc = fc.jet(zeta, 3);
    const Jet2 fl = Jet2::in_z(jf, zeta, 3, 3);
    const Jet2 fcl = Jet2::in_w(jfc, z, 3, 3);
    const Jet2 Gl = Jet2::in_z(G.jet(z, 3), zeta, 3, 3);
    const Jet2 Gcl = Jet2::in_w(Gc.jet(zeta, 3), z, 3, 3);
    const Jet2 rho2 = rho * rho;
    const Jet2 w1 =
        rho + complex(2.0) * jet2_div(rho.dz().dw(), rho2 * fl * fcl);
    const Jet2 w2 = complex(2.0) * jet2_div(rho.dz(), rho2 * fl);
    const Jet2 w3 = complex(2.0) * jet2_div(rho.dw(), rho2 * fcl);
    const Jet2 w4 = jet2_div(Jet2::constant(2.0, z, zeta, 3, 3), rho);
    const Jet2 m11 = w1;
    const Jet2 m12 = w1 * Gcl + w2;
    const Jet2 m21 = Gl * w1 + w3;
    const Jet2 m22 = (Gl * w1 + w3) * Gcl + Gl * w2 + w4;
    Eval out;
    out.x[0] = complex(0.5) * (m11 + m22);
    out.x[1] = complex(0.5) * (m12 + m21);
    out.x[2] = complex(0.0, -0.5) * (m12 - m21);
    out.x[3] = complex(0.5) * (m11 - m22);
    const complex rv = rho.value();
    const complex gv = G.value(z), gcv = Gc.value(zeta);
    const complex n11 = rv, n12 = rv * gcv, n21 = rv * gv, n22 = rv * gv * gcv;
    const CVec4 nvec{complex(0.5) * (n11 + n22), complex(0.5) * (n12 + n21),
                     complex(0.0, -0.5) * (n12 - n21),
                     complex(0.5) * (n11 - n22)};
    const CVec4 psi{out.x[0].value(), out.x[1].value(), out.x[2].value(),
                    out.x[3].value()};
    CVec4 eta = nvec - psi;
    // The square root defining rho is two-valued; flipping its sign negates
    // psi and eta together, so land on the upper sheet.
    if (out.x[0].value().real() < 0.0) {
      for (auto& c : out.x) c = -c;
      eta = complex(-1.0) * eta;
    }
    out.eta = eta;
    return out;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Surface object.
// ---------------------------------------------------------------------------

/// Pointwise evaluation bundle of a conformally immersed surface.
struct SurfaceJet {
  LVec4 psi{}, eta{};
  LVec4 psi_s{}, psi_t{};
  double lambda = 0.0;  ///< conformal factor: ds^2 = lambda |dz|^2
  double mean = 0.0;    ///< mean curvature
  complex hopf{};       ///< <psi_zz, eta>
  double membership = 0.0;        ///< |<psi,psi> + 1|
  double hermitian_defect = 0.0;  ///< largest imaginary residue, relative
};

/// Mean-curvature-one surface bundle: both Gauss maps, the Hopf coefficient,
/// the null lift, and (when built by the direct route) the bivariate
/// hermitian extension.  Evaluation dispatches to the extension when present
/// and to psi = F F^* otherwise.
class BryantSurface {
 public:
  BryantSurface() = default;
  BryantSurface(AnalyticMap G, SecondaryGauss g, AnalyticMap q, LiftMap F,
                std::shared_ptr<const detail::OmegaCore> omega, Rect domain,
                std::optional<double> period, bool horosphere,
                const Tolerances& tol = default_tol())
      : G_(std::move(G)),
        g_(std::move(g)),
        q_(std::move(q)),
        F_(std::move(F)),
        omega_(std::move(omega)),
        domain_(domain),
        period_(period),
        horosphere_(horosphere),
        tol_(tol) {}

  const AnalyticMap& gauss_map() const { return G_; }
  const SecondaryGauss& secondary() const { return g_; }
  const AnalyticMap& hopf_coefficient() const { return q_; }
  const LiftMap& lift() const { return F_; }
  bool direct_route() const { return static_cast<bool>(omega_); }
  const Rect& domain() const { return domain_; }
  const std::optional<double>& period() const { return period_; }
  bool horosphere() const { return horosphere_; }
  double normal_sign() const { return eta_sign_; }
  void set_normal_sign(double s) { eta_sign_ = s < 0.0 ? -1.0 : 1.0; }

  /// Copy of the surface that evaluates through the lift only.
  BryantSurface lift_route() const {
    BryantSurface out = *this;
    out.omega_.reset();
    return out;
  }

  /// Copy with the lift replaced by Phi * F (so psi -> Phi psi Phi^*); the
  /// direct-route extension, if any, is dropped.
  BryantSurface premultiplied(const SL2C& phi) const {
    BryantSurface out = *this;
    out.F_ = F_.premultiplied(phi);
    out.omega_.reset();
    return out;
  }

  SurfaceJet eval(double s, double t) const {
    const complex z(s, t), zeta(s, -t);
    std::array<Jet2, 4> x;
    CVec4 eta_c{};
    bool have_eta = false;
    if (omega_) {
      auto res = omega_->eval(z, zeta);
      x = std::move(res.x);
      eta_c = res.eta;
      have_eta = true;
    } else {
      if (G_.valid()) {
        // Mask near zeros of G' (branch points of the lift formulas).
        const Jet jg = G_.jet(z, 2);
        const double d1 = std::abs(jg.derivative(1));
        const double d2 = std::abs(jg.derivative(2));
        if (d1 == 0.0 || d1 < tol_.mask_radius * d2)
          throw MaskedSingularity("lift route: G' vanishes nearby");
      }
      const auto fj = F_.jets(z, 2);
      std::array<Jet, 4> fc;
      for (int k = 0; k < 4; ++k) fc[k] = detail::conj_jet(fj[k]);
      auto outer = [&](int i, int j) {
        return Jet2::outer(fj[i], fc[j], 2, 2);
      };
      const Jet2 m11 = outer(0, 0) + outer(1, 1);
      const Jet2 m12 = outer(0, 2) + outer(1, 3);
      const Jet2 m21 = outer(2, 0) + outer(3, 1);
      const Jet2 m22 = outer(2, 2) + outer(3, 3);
      x[0] = complex(0.5) * (m11 + m22);
      x[1] = complex(0.5) * (m12 + m21);
      x[2] = complex(0.0, -0.5) * (m12 - m21);
      x[3] = complex(0.5) * (m11 - m22);
    }
    SurfaceJet out;
    const CVec4 val{x[0].value(), x[1].value(), x[2].value(), x[3].value()};
    if (!detail::finite_cvec(val))
      throw DegeneratePoint("surface evaluation produced a non-finite value");
    out.psi = real_part(val);
    const double scale = std::max(1.0, euclid_norm(out.psi));
    out.hermitian_defect = imag_norm(val) / scale;
    out.membership = std::abs(lorentz_inner(val, val) + complex(1.0));
    const CVec4 psi_z{x[0].partial(1, 0), x[1].partial(1, 0),
                      x[2].partial(1, 0), x[3].partial(1, 0)};
    const CVec4 psi_w{x[0].partial(0, 1), x[1].partial(0, 1),
                      x[2].partial(0, 1), x[3].partial(0, 1)};
    const CVec4 psi_zw{x[0].partial(1, 1), x[1].partial(1, 1),
                       x[2].partial(1, 1), x[3].partial(1, 1)};
    const CVec4 psi_zz{x[0].partial(2, 0), x[1].partial(2, 0),
                       x[2].partial(2, 0), x[3].partial(2, 0)};
    out.psi_s = real_part(psi_z + psi_w);
    out.psi_t = real_part(complex(0.0, 1.0) * (psi_z - psi_w));
    const complex lam = 2.0 * lorentz_inner(psi_z, psi_w);
    out.lambda = lam.real();
    out.hermitian_defect =
        std::max(out.hermitian_defect, std::abs(lam.imag()) / scale);
    if (!(out.lambda > 1e-12 * scale * scale))
      throw DegeneratePoint("surface evaluation hit a branch point");
    if (!have_eta) {
      const LVec4 raw = cross3(out.psi, out.psi_s, out.psi_t);
      const double nn = lorentz_inner(raw, raw);
      if (!(nn > 0.0)) throw DegeneratePoint("normal direction degenerates");
      eta_c = complexify((eta_sign_ / std::sqrt(nn)) * raw);
    }
    out.eta = real_part(eta_c);
    out.mean = (2.0 / out.lambda) * lorentz_inner(psi_zw, eta_c).real();
    out.hopf = lorentz_inner(psi_zz, eta_c);
    return out;
  }

  LVec4 psi(double s, double t) const { return eval(s, t).psi; }

 private:
  AnalyticMap G_;
  SecondaryGauss g_;
  AnalyticMap q_;
  LiftMap F_;
  std::shared_ptr<const detail::OmegaCore> omega_;
  Rect domain_{};
  std::optional<double> period_;
  bool horosphere_ = false;
  double eta_sign_ = 1.0;
  Tolerances tol_{};
};

// ---------------------------------------------------------------------------
// Grid sampling.
// ---------------------------------------------------------------------------

struct SampleNode {
  SurfaceJet jet{};
  bool masked = true;
};

/// Row-major grid of surface evaluations over a parameter rectangle.
struct SurfaceSample {
  Rect rect{};
  int ns = 0, nt = 0;
  std::vector<SampleNode> nodes;

  double s(int is) const {
    return ns == 1
               ? rect.s_min
               : rect.s_min + (rect.s_max - rect.s_min) * is / double(ns - 1);
  }
  double t(int it) const {
    return nt == 1
               ? rect.t_min
               : rect.t_min + (rect.t_max - rect.t_min) * it / double(nt - 1);
  }
  const SampleNode& at(int is, int it) const {
    return nodes[static_cast<size_t>(it) * ns + is];
  }
  int masked_count() const {
    int m = 0;
    for (const auto& n : nodes) m += n.masked ? 1 : 0;
    return m;
  }
  double max_mean_deviation() const {
    double worst = 0.0;
    for (const auto& n : nodes)
      if (!n.masked) worst = std::max(worst, std::abs(n.jet.mean - 1.0));
    return worst;
  }
  double max_membership() const {
    double worst = 0.0;
    for (const auto& n : nodes)
      if (!n.masked) worst = std::max(worst, n.jet.membership);
    return worst;
  }
  double max_hermitian_defect() const {
    double worst = 0.0;
    for (const auto& n : nodes)
      if (!n.masked) worst = std::max(worst, n.jet.hermitian_defect);
    return worst;
  }
};

/// Evaluate the surface over a grid, masking nodes whose evaluation throws a
/// typed error (singularity proximity, branch points and the like).  Columns
/// run in parallel; throws EmptyGrid when no node survives.
inline SurfaceSample sample_surface(const BryantSurface& surf, const Rect& rect,
                                    int ns, int nt,
                                    const Tolerances& tol = default_tol()) {
  (void)tol;
  if (ns < 1 || nt < 1)
    throw InvalidArgument("sample_surface: grid must be at least 1x1");
  SurfaceSample out;
  out.rect = rect;
  out.ns = ns;
  out.nt = nt;
  out.nodes.assign(static_cast<size_t>(ns) * nt, SampleNode{});
  parallel_for(ns, [&](int is) {
    const double s = out.s(is);
    for (int it = 0; it < nt; ++it) {
      SampleNode node;
      try {
        node.jet = surf.eval(s, out.t(it));
        node.masked = false;
      } catch (const Error&) {
        node.masked = true;
      }
      out.nodes[static_cast<size_t>(it) * ns + is] = node;
    }
  });
  if (out.masked_count() == ns * nt)
    throw EmptyGrid("sample_surface: every grid node is masked");
  return out;
}

// ---------------------------------------------------------------------------
// Frames and isometry alignment.
// ---------------------------------------------------------------------------

/// Adapted frame at a surface point: position, two tangent directions and
/// the unit normal (consumers normalize the directions).
struct SurfaceFrame {
  LVec4 point{}, tangent_s{}, tangent_t{}, normal{};
};

inline SurfaceFrame surface_frame(const BryantSurface& surf, double s,
                                  double t) {
  const SurfaceJet j = surf.eval(s, t);
  return {j.psi, j.psi_s, j.psi_t, j.eta};
}

/// Frame carried by Björling data at s: (beta, beta', beta ^ V ^ beta', V).
inline SurfaceFrame data_frame(const BjorlingData& data, double s) {
  const LVec4 b = data.beta().real_value(s);
  const LVec4 v = data.v().real_value(s);
  const LVec4 bp = real_part(data.beta().derivative(complex(s), 1));
  return {b, bp, cross3(b, v, bp), v};
}

namespace detail {

inline std::array<std::array<double, 4>, 4> mat4_mul(
    const std::array<std::array<double, 4>, 4>& A,
    const std::array<std::array<double, 4>, 4>& B) {
  std::array<std::array<double, 4>, 4> C{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += A[r][k] * B[k][c];
      C[r][c] = acc;
    }
  return C;
}

}  // namespace detail

/// The unique orientation- and time-orientation-preserving isometry of H^3
/// mapping one adapted frame to another, returned as the SL(2,C) element
/// acting by Phi h(x) Phi^*.  Throws DegenerateData when the frames are not
/// Minkowski-orthonormal after normalization, or differ by a reflection.
inline SL2C align_isometry(const SurfaceFrame& from, const SurfaceFrame& to,
                           const Tolerances& tol = default_tol()) {
  auto columns = [](const SurfaceFrame& f) -> std::array<LVec4, 4> {
    auto unit_space = [](const LVec4& v, const char* what) {
      const double n = lorentz_inner(v, v);
      if (!(n > 0.0))
        throw DegenerateData(std::string(what) + ": not spacelike");
      return (1.0 / std::sqrt(n)) * v;
    };
    const double p = lorentz_inner(f.point, f.point);
    if (!(p < 0.0) || f.point.x0 <= 0.0)
      throw DegenerateData("align_isometry: frame point is not on H^3");
    return {(1.0 / std::sqrt(-p)) * f.point,
            unit_space(f.tangent_s, "align_isometry: tangent_s"),
            unit_space(f.tangent_t, "align_isometry: tangent_t"),
            unit_space(f.normal, "align_isometry: normal")};
  };
  const auto cf = columns(from);
  const auto ct = columns(to);
  for (const auto& cols : {cf, ct}) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double want = (i == j) ? (i == 0 ? -1.0 : 1.0) : 0.0;
        if (std::abs(lorentz_inner(cols[i], cols[j]) - want) > 1e-6)
          throw DegenerateData("align_isometry: frame is not orthonormal");
      }
  }
  // A = M_to * M_from^{-1} with M^{-1} = J M^T J for J-orthonormal columns:
  // A[r][c] = sum_k ct_k[r] * j_k * cf_k[c] * j_c, J = diag(-1,1,1,1).
  std::array<std::array<double, 4>, 4> A{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) {
        const double jk = (k == 0 ? -1.0 : 1.0);
        const double jc = (c == 0 ? -1.0 : 1.0);
        acc += ct[k][r] * jk * cf[k][c] * jc;
      }
      A[r][c] = acc;
    }
  // Polar split: pure boost carrying e0 to A e0, then a spatial rotation.
  const LVec4 Ae0{A[0][0], A[1][0], A[2][0], A[3][0]};
  if (Ae0.x0 <= 0.0)
    throw DegenerateData("align_isometry: map reverses time orientation");
  const Herm2 H0 = vec_to_herm(Ae0);
  const double norm = std::sqrt(H0.m11 + H0.m22 + 2.0);
  const SL2C P{complex((H0.m11 + 1.0) / norm), H0.m12 / norm,
               std::conj(H0.m12) / norm, complex((H0.m22 + 1.0) / norm)};
  const auto A1 = detail::mat4_mul(sl2c_to_so13(P.inverse(), tol), A);
  if (std::abs(A1[0][0] - 1.0) > 1e-6 || std::abs(A1[0][1]) > 1e-6 ||
      std::abs(A1[0][2]) > 1e-6 || std::abs(A1[0][3]) > 1e-6)
    throw DegenerateData("align_isometry: polar split failed");
  std::array<std::array<double, 3>, 3> R{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R[r][c] = A1[r + 1][c + 1];
  const double detR = R[0][0] * (R[1][1] * R[2][2] - R[1][2] * R[2][1]) -
                      R[0][1] * (R[1][0] * R[2][2] - R[1][2] * R[2][0]) +
                      R[0][2] * (R[1][0] * R[2][1] - R[1][1] * R[2][0]);
  if (detR < 0.0)
    throw DegenerateData("align_isometry: frames differ by a reflection");
  const SL2C phi = P * su2_from_rotation(R);
  const auto check = sl2c_to_so13(phi, tol);
  double err = 0.0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      err = std::max(err, std::abs(check[r][c] - A[r][c]));
  if (err > 1e-6)
    throw DegenerateData("align_isometry: reconstruction mismatch");
  return phi;
}

/// Largest boundary deviation of the surface against its Björling data:
/// max over samples of |psi(s,0) - beta(s)| and |eta(s,0) - V(s)|.
inline double data_residual(const BryantSurface& surf, const BjorlingData& data,
                            int n = 33) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s =
        data.s_min() + (data.s_max() - data.s_min()) * i / double(n - 1);
    const SurfaceJet j = surf.eval(s, 0.0);
    worst = std::max(worst, euclid_norm(j.psi - data.beta().real_value(s)));
    worst = std::max(worst, euclid_norm(j.eta - data.v().real_value(s)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Björling solver.
// ---------------------------------------------------------------------------

struct BjorlingSolution {
  BryantSurface surface;
  SurfaceSample sample;
};

namespace detail {

/// Fix the normal sign of a lift-backed surface against the data normal and,
/// when the boundary residual is visible, realign the lift by the frame
/// isometry at the base point.  `surf` must evaluate through its lift.
inline void calibrate_against_data(BryantSurface& surf,
                                   const BjorlingData& data,
                                   const Tolerances& tol) {
  const double s0 = data.s0();
  {
    BryantSurface probe = surf.lift_route();
    probe.set_normal_sign(1.0);
    const SurfaceJet j = probe.eval(s0, 0.0);
    const double dot = lorentz_inner(j.eta, data.v().real_value(s0));
    surf.set_normal_sign(dot >= 0.0 ? 1.0 : -1.0);
  }
  if (data_residual(surf, data) > 1e-7) {
    const double sign = surf.normal_sign();
    // Build both frames by the same (point, tangent, normal) recipe so they
    // share handedness and differ by a proper isometry.
    const SurfaceJet j = surf.eval(s0, 0.0);
    const SurfaceFrame from{j.psi, j.psi_s, cross3(j.psi, j.eta, j.psi_s),
                            j.eta};
    const LVec4 b = data.beta().real_value(s0);
    const LVec4 v = data.v().real_value(s0);
    const LVec4 bp = real_part(data.beta().derivative(complex(s0), 1));
    const SurfaceFrame to{b, bp, cross3(b, v, bp), v};
    const SL2C phi = align_isometry(from, to, tol);
    BryantSurface aligned = surf.premultiplied(phi);
    aligned.set_normal_sign(sign);
    surf = std::move(aligned);
  }
}

}  // namespace detail

/// Closed-form lift through totally umbilic data: the surface is the
/// horosphere < x, n > = -1 for the constant null direction n = beta + V,
/// carried by F(z) = Phi [[1, w(z)],[0, 1]] where w is its flat chart.
inline BryantSurface horosphere_surface(const BjorlingData& data,
                                        const Rect& domain,
                                        const Tolerances& tol = default_tol()) {
  const double s0 = data.s0();
  const LVec4 n = real_part(data.nu().value(complex(s0)));
  // Spinor v with v v^* = h(n), pivoting on the larger diagonal entry.
  const Herm2 hn = vec_to_herm(n);
  complex v1, v2;
  if (hn.m11 >= hn.m22) {
    if (!(hn.m11 > 0.0))
      throw DegenerateData("horosphere_surface: null direction degenerates");
    v1 = complex(std::sqrt(hn.m11));
    v2 = std::conj(hn.m12) / std::sqrt(hn.m11);
  } else {
    v1 = hn.m12 / std::sqrt(hn.m22);
    v2 = complex(std::sqrt(hn.m22));
  }
  const double nn = std::norm(v1) + std::norm(v2);
  const SL2C phi{v1, -std::conj(v2) / nn, v2, std::conj(v1) / nn};
  const auto Ainv = sl2c_to_so13(phi.inverse(), tol);
  const CurveMap pulled = curve_apply(Ainv, data.beta());
  AnalyticMap w(
      [pulled](complex z, int m) {
        const auto j = pulled.jets(z, m);
        return (j[1] + complex(0.0, 1.0) * j[2]).truncated(m);
      },
      {}, false);
  LiftMap F([phi, w](complex z, int m) {
    const Jet jw = w.jet(z, m);
    return std::array<Jet, 4>{
        Jet::constant(phi.a, z, m),
        (phi.a * jw + Jet::constant(phi.b, z, m)).truncated(m),
        Jet::constant(phi.c, z, m),
        (phi.c * jw + Jet::constant(phi.d, z, m)).truncated(m)};
  });
  BryantSurface surf(AnalyticMap(), SecondaryGauss(), map_constant(0.0),
                     std::move(F), nullptr, domain, data.period(), true, tol);
  detail::calibrate_against_data(surf, data, tol);
  return surf;
}

/// Solve the Björling problem.  The surface is assembled twice: through the
/// bivariate hermitian extension of the modified conformal factor (primary
/// evaluation route) and through the closed-form null lift from the two
/// Gauss maps (kept as the lift; drives gauge and diagnostic work).  Totally
/// umbilic data short-circuits to the tagged horosphere special case.
inline BjorlingSolution solve_bjorling(const BjorlingData& data,
                                       std::optional<Rect> rect = std::nullopt,
                                       int ns = 41, int nt = 21,
                                       const Tolerances& tol = default_tol()) {
  const Rect domain =
      rect.value_or(Rect{data.s_min(), data.s_max(), -1.0, 1.0});
  {
    const AnalyticMap q = hopf_q(data);
    double worst = 0.0;
    for (int i = 0; i < 33; ++i) {
      const double s = data.s_min() + (data.s_max() - data.s_min()) * i / 32.0;
      worst = std::max(worst, std::abs(q.value(complex(s))));
    }
    if (worst < 1e-12) {
      BryantSurface surf = horosphere_surface(data, domain, tol);
      SurfaceSample sample = sample_surface(surf, domain, ns, nt, tol);
      return {std::move(surf), std::move(sample)};
    }
  }
  const AnalyticMap G = hyperbolic_gauss(data, tol);
  const AnalyticMap q = hopf_q(data);
  const AnalyticMap f = map_derivative(G);
  auto [v, w] = rho_data(data);
  const ModifiedSolution rho =
      solve_modified(v, w, f, data.s_min(), data.s_max(), tol);
  SecondaryGauss g(secondary_gauss(data, tol));
  LiftMap F = small_lift(g, G, tol);

  BryantSurface calibrated(G, std::move(g), q, std::move(F), nullptr, domain,
                           data.period(), false, tol);
  detail::calibrate_against_data(calibrated, data, tol);

  auto core = std::make_shared<detail::OmegaCore>();
  const LiouvilleSolution& phi_field = rho.field();
  if (!phi_field.projective_pair())
    throw InvalidArgument(
        "solve_bjorling: modified field lacks a projective pair");
  core->pair = *phi_field.projective_pair();
  core->a_map = phi_field.data().a();
  core->roa_map = map_div(phi_field.data().b(), phi_field.data().a());
  core->omega0 = core->pair.wronskian();
  core->f = f;
  core->fc = map_conj(f);
  core->G = G;
  core->Gc = map_conj(G);
  core->mask_radius = tol.mask_radius;

  BryantSurface surf(G, calibrated.secondary(), q, calibrated.lift(),
                     std::move(core), domain, data.period(), false, tol);
  surf.set_normal_sign(calibrated.normal_sign());
  SurfaceSample sample = sample_surface(surf, domain, ns, nt, tol);
  return {std::move(surf), std::move(sample)};
}

// ---------------------------------------------------------------------------
// Metric reports.
// ---------------------------------------------------------------------------

struct MetricNode {
  double primal = 0.0;  ///< ds^2 density |q|^2 (|y1|^2+|y2|^2)^2 / |w|^2
  double dual = 0.0;    ///< dual density (1+|G|^2)^2 |q / G'|^2
  double gauss = 0.0;   ///< intrinsic curvature K = -4|q|^2 / primal^2
  double pseudo = 0.0;  ///< density of -K ds^2 = 4|w|^2/(|y1|^2+|y2|^2)^2
  bool masked = true;
};

struct MetricReport {
  Rect rect{};
  int ns = 0, nt = 0;
  std::vector<MetricNode> nodes;
  double total_curvature = 0.0;       ///< trapezoid integral of K dA
  double dual_total_curvature = 0.0;  ///< trapezoid integral of K# dA#
  int masked = 0;

  const MetricNode& at(int is, int it) const {
    return nodes[static_cast<size_t>(it) * ns + is];
  }
  double s(int is) const {
    return ns == 1
               ? rect.s_min
               : rect.s_min + (rect.s_max - rect.s_min) * is / double(ns - 1);
  }
  double t(int it) const {
    return nt == 1
               ? rect.t_min
               : rect.t_min + (rect.t_max - rect.t_min) * it / double(nt - 1);
  }
};

/// Closed-form metric quantities on a grid plus total-curvature integrals:
/// the total curvature of ds^2 is minus the integral of the pseudo-metric
/// density, and the dual total curvature is minus the spherical area swept
/// by the hyperbolic Gauss map.
inline MetricReport metrics(const BryantSurface& surf, const Rect& rect, int ns,
                            int nt, const Tolerances& tol = default_tol()) {
  (void)tol;
  if (ns < 2 || nt < 2)
    throw InvalidArgument("metrics: the grid must be at least 2x2");
  if (surf.horosphere() || !surf.secondary().valid())
    throw InvalidArgument(
        "metrics: undefined for the umbilic (horosphere) special case");
  MetricReport out;
  out.rect = rect;
  out.ns = ns;
  out.nt = nt;
  out.nodes.assign(static_cast<size_t>(ns) * nt, MetricNode{});
  const AnalyticMap& G = surf.gauss_map();
  const AnalyticMap& q = surf.hopf_coefficient();
  const SecondaryGauss& g = surf.secondary();
  parallel_for(ns, [&](int is) {
    const double s = out.s(is);
    for (int it = 0; it < nt; ++it) {
      const complex z(s, out.t(it));
      MetricNode node;
      try {
        auto [y1, y2] = g.homogeneous_jet(z, 1);
        const double w2 = std::norm(y1.derivative(1) * y2.value() -
                                    y1.value() * y2.derivative(1));
        const double norm2 = std::norm(y1.value()) + std::norm(y2.value());
        const double q2 = std::norm(q.value(z));
        const Jet jg = G.jet(z, 1);
        const double gp2 = std::norm(jg.derivative(1));
        const double gn2 = 1.0 + std::norm(jg.value());
        if (!(w2 > 0.0) || !(norm2 > 0.0) || !(gp2 > 0.0))
          throw DegeneratePoint("metrics: degenerate node");
        node.primal = q2 * norm2 * norm2 / w2;
        node.pseudo = 4.0 * w2 / (norm2 * norm2);
        node.dual = gn2 * gn2 * q2 / gp2;
        node.gauss = -4.0 * q2 / (node.primal * node.primal);
        node.masked = false;
      } catch (const Error&) {
        node.masked = true;
      }
      out.nodes[static_cast<size_t>(it) * ns + is] = node;
    }
  });
  const double hs = (rect.s_max - rect.s_min) / (ns - 1);
  const double ht = (rect.t_max - rect.t_min) / (nt - 1);
  double tot = 0.0, dual_tot = 0.0;
  for (int it = 0; it < nt; ++it)
    for (int is = 0; is < ns; ++is) {
      const MetricNode& node = out.at(is, it);
      if (node.masked) {
        ++out.masked;
        continue;
      }
      const double ws = (is == 0 || is == ns - 1) ? 0.5 : 1.0;
      const double wt = (it == 0 || it == nt - 1) ? 0.5 : 1.0;
      const double wgt = ws * wt * hs * ht;
      tot += wgt * node.pseudo;
      const Jet jg = G.jet(complex(out.s(is), out.t(it)), 1);
      dual_tot += wgt * 4.0 * std::norm(jg.derivative(1)) /
                  std::pow(1.0 + std::norm(jg.value()), 2);
    }
  out.total_curvature = -tot;
  out.dual_total_curvature = -dual_tot;
  return out;
}

// ---------------------------------------------------------------------------
// Planar-geodesic and pregeodesic constructions.
// ---------------------------------------------------------------------------

/// Normal field of the mean-curvature-one surface meeting the plane of the
/// curve orthogonally along beta: V = (sign/|beta'|) beta ^ beta' ^ e, where
/// e is the unit normal of the coordinate plane containing the curve
/// ({x2 = 0} or {x3 = 0}; rotate general planar data into one of these
/// first).  Throws GeodesicInput when beta is a geodesic: the in-plane
/// curvature vanishes identically and the orthogonal surface through the
/// curve is no longer unique.
inline CurveMap planar_geodesic_normal(const CurveMap& beta, int sign,
                                       double s_min, double s_max,
                                       const Tolerances& tol = default_tol()) {
  if (sign != 1 && sign != -1)
    throw InvalidArgument("planar_geodesic_normal: sign must be +-1");
  double max2 = 0.0, max3 = 0.0, max_curv = 0.0, scale = 1.0;
  for (int i = 0; i < 33; ++i) {
    const double s = s_min + (s_max - s_min) * i / 32.0;
    const auto j = beta.jets(complex(s), 2);
    const CVec4 b = detail::vec4j_value(j);
    const CVec4 bp{j[0].derivative(1), j[1].derivative(1), j[2].derivative(1),
                   j[3].derivative(1)};
    const CVec4 bpp{j[0].derivative(2), j[1].derivative(2), j[2].derivative(2),
                    j[3].derivative(2)};
    scale = std::max(scale, euclid_norm(b));
    max2 = std::max(max2, std::abs(b.x2));
    max3 = std::max(max3, std::abs(b.x3));
    const complex bp2 = lorentz_inner(bp, bp);
    if (std::abs(bp2) < 1e-18)
      throw DegenerateData("planar_geodesic_normal: beta' vanishes");
    const CVec4 x =
        bpp - (lorentz_inner(bpp, bp) / bp2) * bp - bp2 * b;
    max_curv = std::max(max_curv, euclid_norm(x) / std::abs(bp2));
  }
  if (max_curv <= 1e-9 * scale)
    throw GeodesicInput(
        "planar_geodesic_normal: beta is a geodesic (vanishing curvature); "
        "the orthogonal surface through it is not unique");
  int plane = -1;
  if (max2 <= tol.membership * scale)
    plane = 2;
  else if (max3 <= tol.membership * scale)
    plane = 3;
  else
    throw InvalidArgument(
        "planar_geodesic_normal: the curve lies in neither coordinate plane "
        "{x2 = 0} nor {x3 = 0}; rotate the data first");
  const CurveMap bb = beta;
  const double sg = sign;
  const int pl = plane;
  std::array<AnalyticMap, 4> comp;
  for (int k = 0; k < 4; ++k) {
    comp[k] = AnalyticMap(
        [bb, sg, pl, k](complex z, int n) {
          const auto jb = bb.jets(z, n + 1);
          const auto b = detail::vec4j_truncated(jb, n);
          const auto bp = detail::vec4j_derivative(jb);
          detail::Vec4J e{Jet::constant(0.0, z, n), Jet::constant(0.0, z, n),
                          Jet::constant(0.0, z, n), Jet::constant(0.0, z, n)};
          e[static_cast<std::size_t>(pl)] = Jet::constant(1.0, z, n);
          const auto x = detail::cross3_vec4j(b, bp, e);
          const Jet norm = jet_sqrt(detail::inner4_jet(bp, bp));
          return (complex(sg) * jet_div(x[k], norm)).truncated(n);
        },
        {}, true);
  }
  return {comp[0], comp[1], comp[2], comp[3]};
}

inline BjorlingData planar_geodesic_data(
    const CurveMap& beta, int sign, double s_min, double s_max,
    std::optional<double> period = {},
    const Tolerances& tol = default_tol()) {
  return BjorlingData(beta,
                      planar_geodesic_normal(beta, sign, s_min, s_max, tol),
                      s_min, s_max, period, tol);
}

/// Björling surface meeting the plane of beta orthogonally along beta.  The
/// secondary Gauss map is available in closed form,
/// g = exp(i * integral of sqrt(a)), so no Schwarzian marching is needed.
/// The resulting surface is symmetric with respect to the plane of the curve.
inline BjorlingSolution planar_geodesic_surface(
    const CurveMap& beta, int sign, double s_min, double s_max,
    std::optional<double> period = {}, std::optional<Rect> rect = std::nullopt,
    int ns = 41, int nt = 21, const Tolerances& tol = default_tol()) {
  const BjorlingData data =
      planar_geodesic_data(beta, sign, s_min, s_max, period, tol);
  const Rect domain = rect.value_or(Rect{s_min, s_max, -1.0, 1.0});
  const AnalyticMap G = hyperbolic_gauss(data, tol);
  const AnalyticMap q = hopf_q(data);
  const LiouvilleCauchyData ld = liouville_data(data, tol);
  const AnalyticMap u =
      map_integral(map_sqrt(ld.a()), complex(ld.s0()), complex(0.0), tol);
  SecondaryGauss g(map_exp(map_scale(complex(0.0, 1.0), u)));
  LiftMap F = small_lift(g, G, tol);
  BryantSurface surf(G, std::move(g), q, std::move(F), nullptr, domain,
                     data.period(), false, tol);
  detail::calibrate_against_data(surf, data, tol);
  SurfaceSample sample = sample_surface(surf, domain, ns, nt, tol);
  return {std::move(surf), std::move(sample)};
}

/// Unit normal candidate of the surface containing beta as a pregeodesic:
/// V = sign * normalized( beta'' - (<beta'',beta'>/<beta',beta'>) beta'
///                        - <beta',beta'> beta ).
/// Throws GeodesicInput when the bracket vanishes somewhere (beta is a
/// geodesic and the Björling normal is not unique).
inline CurveMap pregeodesic_normal(const CurveMap& beta, int sign,
                                   double s_min, double s_max,
                                   const Tolerances& tol = default_tol()) {
  (void)tol;
  if (sign != 1 && sign != -1)
    throw InvalidArgument("pregeodesic_normal: sign must be +-1");
  for (int i = 0; i < 33; ++i) {
    const double s = s_min + (s_max - s_min) * i / 32.0;
    const auto j = beta.jets(complex(s), 2);
    const CVec4 b = detail::vec4j_value(j);
    const CVec4 bp{j[0].derivative(1), j[1].derivative(1), j[2].derivative(1),
                   j[3].derivative(1)};
    const CVec4 bpp{j[0].derivative(2), j[1].derivative(2), j[2].derivative(2),
                    j[3].derivative(2)};
    const complex sp = lorentz_inner(bp, bp);
    const CVec4 x = bpp - (lorentz_inner(bpp, bp) / sp) * bp - sp * b;
    const double scale =
        std::max(1.0, euclid_norm(bpp) + std::abs(sp) * euclid_norm(b));
    if (euclid_norm(x) <= 1e-9 * scale)
      throw GeodesicInput(
          "pregeodesic_normal: the curve is a geodesic of H^3; the normal "
          "field is not determined");
  }
  const CurveMap bb = beta;
  const double sg = sign;
  std::array<AnalyticMap, 4> comp;
  for (int k = 0; k < 4; ++k) {
    comp[k] = AnalyticMap(
        [bb, sg, k](complex z, int n) {
          const auto j = bb.jets(z, n + 2);
          const auto b = detail::vec4j_truncated(j, n);
          const auto bp_f = detail::vec4j_derivative(j);
          const auto bpp = detail::vec4j_derivative(bp_f);
          const auto bp = detail::vec4j_truncated(bp_f, n);
          const Jet sp = detail::inner4_jet(bp, bp);
          const Jet c1 = jet_div(detail::inner4_jet(bpp, bp), sp);
          detail::Vec4J x{};
          for (int m = 0; m < 4; ++m) x[m] = bpp[m] - c1 * bp[m] - sp * b[m];
          const Jet norm = jet_sqrt(detail::inner4_jet(x, x));
          return (complex(sg) * jet_div(x[k], norm)).truncated(n);
        },
        {}, true);
  }
  return {comp[0], comp[1], comp[2], comp[3]};
}

inline BjorlingData pregeodesic_data(const CurveMap& beta, int sign,
                                     double s_min, double s_max,
                                     std::optional<double> period = {},
                                     const Tolerances& tol = default_tol()) {
  return BjorlingData(beta, pregeodesic_normal(beta, sign, s_min, s_max, tol),
                      s_min, s_max, period, tol);
}

/// Björling surface containing beta as a pregeodesic (curvature vector
/// everywhere tangent): delegates to the generic solver.
inline BjorlingSolution pregeodesic_surface(
    const CurveMap& beta, int sign, double s_min, double s_max,
    std::optional<double> period = {}, std::optional<Rect> rect = std::nullopt,
    int ns = 41, int nt = 21, const Tolerances& tol = default_tol()) {
  return solve_bjorling(
      pregeodesic_data(beta, sign, s_min, s_max, period, tol), rect, ns, nt,
      tol);
}

// ---------------------------------------------------------------------------
// Gallery of closed-form families.
// ---------------------------------------------------------------------------

/// Named example family with closed forms of its invariants.
struct GalleryResult {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  std::optional<BjorlingData> data;  ///< absent on the horosphere branch
  AnalyticMap G, g, q;               ///< closed forms
  double k = 0.0;                    ///< exponent invariant (k or k2)
  complex k1{};                      ///< leading coefficient of G
  complex g_rate{};                  ///< g = exp(g_rate z)
  complex G_rate{};                  ///< G = k1 exp(G_rate z)
  std::optional<double> period;
  bool horosphere = false;
};

/// Rotationally invariant catenoid cousins: beta is the circle of Euclidean
/// radius b > 0 at height x3 = 0, V = eps (b, c cos s, c sin s, 0) with
/// c = sqrt(1+b^2).  Closed forms: G = eps e^{-iz},
/// q = -(b/2)(b + eps c), g = e^{i sqrt(2k) z}, k = 1/2 + b (b + eps c).
inline GalleryResult gallery_catenoid_cousin(
    double b, int eps, const Tolerances& tol = default_tol()) {
  if (!(b > 0.0))
    throw ParameterConstraint("gallery_catenoid_cousin: b must be positive");
  if (eps != 1 && eps != -1)
    throw ParameterConstraint("gallery_catenoid_cousin: eps must be +-1");
  const double c = std::sqrt(1.0 + b * b);
  const AnalyticMap cosm = map_cos(map_identity());
  const AnalyticMap sinm = map_sin(map_identity());
  CurveMap beta(map_constant(c), map_scale(b, cosm), map_scale(b, sinm),
                map_constant(0.0));
  CurveMap v(map_constant(eps * b), map_scale(eps * c, cosm),
             map_scale(eps * c, sinm), map_constant(0.0));
  GalleryResult out;
  out.name = "catenoid-cousin";
  out.params = {{"b", b}, {"eps", double(eps)}};
  out.period = 2.0 * kPi;
  out.data.emplace(std::move(beta), std::move(v), 0.0, 2.0 * kPi, out.period,
                   tol);
  out.k = 0.5 + b * (b + eps * c);
  out.k1 = complex(double(eps));
  out.G_rate = complex(0.0, -1.0);
  out.g_rate = complex(0.0, std::sqrt(2.0 * out.k));
  out.G = map_scale(out.k1, map_exp(map_scale(out.G_rate, map_identity())));
  out.g = map_exp(map_scale(out.g_rate, map_identity()));
  out.q = map_constant(-0.5 * b * (b + eps * c));
  return out;
}

/// Surfaces invariant under hyperbolic translations along {x1 = x2 = 0}:
/// beta = (a cosh s, b, 0, a sinh s), V = (lambda cosh s, c, d,
/// lambda sinh s), constrained by a > 0, a^2 - b^2 = 1, a lambda = b c,
/// -lambda^2 + c^2 + d^2 = 1.  Closed forms: G = k1 e^{-z} with
/// k1 = (b + c - i d)/(a + lambda), g = e^{i sqrt(2 k2) z} with
/// k2 = -1/2 + a (a + lambda), q = -(a/2)(a + lambda).  The umbilic limit
/// a (a + lambda) = 0 is flagged as a horosphere (no strip is built there,
/// and the remaining constraints are not enforced on that branch).
inline GalleryResult gallery_hyperbolic_invariant(
    double a, double b, double c, double d, double lambda,
    const Tolerances& tol = default_tol()) {
  if (!(a > 0.0))
    throw ParameterConstraint(
        "gallery_hyperbolic_invariant: a must be positive");
  if (std::abs(a * a - b * b - 1.0) > 1e-9)
    throw ParameterConstraint(
        "gallery_hyperbolic_invariant: a^2 - b^2 = 1 violated");
  GalleryResult out;
  out.name = "hyperbolic-invariant";
  out.params = {{"a", a}, {"b", b}, {"c", c}, {"d", d}, {"lambda", lambda}};
  out.k = -0.5 + a * (a + lambda);
  if (std::abs(a * (a + lambda)) <= 1e-9) {
    out.horosphere = true;
    return out;
  }
  out.k1 = complex(b + c, -d) / (a + lambda);
  if (std::abs(out.k1) <= 1e-12) {
    out.horosphere = true;
    return out;
  }
  if (std::abs(a * lambda - b * c) > 1e-9)
    throw ParameterConstraint(
        "gallery_hyperbolic_invariant: a lambda = b c violated");
  if (std::abs(-lambda * lambda + c * c + d * d - 1.0) > 1e-9)
    throw ParameterConstraint(
        "gallery_hyperbolic_invariant: -lambda^2 + c^2 + d^2 = 1 violated");
  const AnalyticMap ch = map_cosh(map_identity());
  const AnalyticMap sh = map_sinh(map_identity());
  CurveMap beta(map_scale(a, ch), map_constant(b), map_constant(0.0),
                map_scale(a, sh));
  CurveMap v(map_scale(lambda, ch), map_constant(c), map_constant(d),
             map_scale(lambda, sh));
  out.data.emplace(std::move(beta), std::move(v), -1.5, 1.5, std::nullopt,
                   tol);
  out.G_rate = complex(-1.0);
  out.g_rate = complex(0.0, std::sqrt(2.0 * out.k));
  out.G = map_scale(out.k1, map_exp(map_scale(out.G_rate, map_identity())));
  out.g = map_exp(map_scale(out.g_rate, map_identity()));
  out.q = map_constant(-0.5 * a * (a + lambda));
  return out;
}

/// Helicoidal surfaces: beta = (c cosh(alpha s), b cos s, b sin s,
/// c sinh(alpha s)) with c^2 - b^2 = 1, c > 0, b != 0, and
/// V = cos(phi) xi + (sin(phi)/L) beta ^ beta' ^ xi where
/// xi = (b cosh(alpha s), c cos s, c sin s, b sinh(alpha s)) and
/// L = sqrt(b^2 + c^2 alpha^2).  Closed forms: G = k1 e^{-(alpha + i) z},
/// constant Hopf coefficient, g = e^{c2 z} with c2^2 = (alpha+i)^2 + 4 q.
inline GalleryResult gallery_helicoid(double alpha, double phi, double c,
                                      double b,
                                      const Tolerances& tol = default_tol()) {
  if (!(c > 0.0))
    throw ParameterConstraint("gallery_helicoid: c must be positive");
  if (std::abs(c * c - b * b - 1.0) > 1e-9)
    throw ParameterConstraint("gallery_helicoid: c^2 - b^2 = 1 violated");
  if (std::abs(b) <= 1e-12)
    throw ParameterConstraint(
        "gallery_helicoid: b = 0 degenerates the helix to the axis geodesic");
  const double L = std::sqrt(b * b + c * c * alpha * alpha);
  const AnalyticMap sc = map_scale(alpha, map_identity());
  const AnalyticMap ach = map_cosh(sc);
  const AnalyticMap ash = map_sinh(sc);
  const AnalyticMap cosm = map_cos(map_identity());
  const AnalyticMap sinm = map_sin(map_identity());
  CurveMap beta(map_scale(c, ach), map_scale(b, cosm), map_scale(b, sinm),
                map_scale(c, ash));
  CurveMap xi(map_scale(b, ach), map_scale(c, cosm), map_scale(c, sinm),
              map_scale(b, ash));
  const double cph = std::cos(phi), sph = std::sin(phi);
  const CurveMap bb = beta;
  const CurveMap xx = xi;
  std::array<AnalyticMap, 4> vcomp;
  for (int k = 0; k < 4; ++k) {
    vcomp[k] = AnalyticMap(
        [bb, xx, cph, sph, L, k](complex z, int n) {
          const auto jb = bb.jets(z, n + 1);
          const auto jx = detail::vec4j_truncated(xx.jets(z, n), n);
          const auto bcur = detail::vec4j_truncated(jb, n);
          const auto bp = detail::vec4j_derivative(jb);
          const auto cr = detail::cross3_vec4j(bcur, bp, jx);
          return (complex(cph) * jx[k] + complex(sph / L) * cr[k])
              .truncated(n);
        },
        {}, true);
  }
  CurveMap v(vcomp[0], vcomp[1], vcomp[2], vcomp[3]);
  GalleryResult out;
  out.name = "helicoid";
  out.params = {{"alpha", alpha}, {"phi", phi}, {"c", c}, {"b", b}};
  out.period = (alpha == 0.0) ? std::optional<double>(2.0 * kPi) : std::nullopt;
  out.data.emplace(std::move(beta), std::move(v), 0.0, 2.0 * kPi, out.period,
                   tol);
  // nu(0) = (c + b cph, b + c cph, c alpha sph / L, -b sph / L).
  const double den = (c + b * cph) + (-b * sph / L);
  if (std::abs(den) <= 1e-9)
    throw DenominatorVanishes(
        "gallery_helicoid: nu0 + nu3 vanishes at s = 0; rotate the data");
  out.k1 = complex(b + c * cph, -c * alpha * sph / L) / den;
  out.G_rate = complex(-alpha, -1.0);
  out.G = map_scale(out.k1, map_exp(map_scale(out.G_rate, map_identity())));
  const complex q0 = hopf_q(*out.data).value(complex(0.0));
  out.q = map_constant(q0);
  const complex mu(alpha, 1.0);
  out.g_rate = std::sqrt(mu * mu + 4.0 * q0);
  out.g = map_exp(map_scale(out.g_rate, map_identity()));
  return out;
}

/// Assemble the surface of a gallery entry through the generic pipeline.
inline BjorlingSolution gallery_surface(const GalleryResult& entry,
                                        std::optional<Rect> rect = std::nullopt,
                                        int ns = 41, int nt = 21,
                                        const Tolerances& tol = default_tol()) {
  if (entry.horosphere || !entry.data)
    throw InvalidArgument(
        "gallery_surface: the entry is the flagged horosphere limit and has "
        "no strip to solve");
  return solve_bjorling(*entry.data, rect, ns, nt, tol);
}

// ---------------------------------------------------------------------------
// Associate family.
// ---------------------------------------------------------------------------

/// Associate family member at angle theta: the secondary Gauss map is kept,
/// the Hopf coefficient becomes e^{i theta} q, and the hyperbolic Gauss map
/// is re-derived from S(G_theta) = S(G) - 2 (1 - e^{i theta}) q (a pole-free
/// right-hand side), seeded with the 2-jet of G at the domain base point.
/// The induced metric is theta-invariant by construction.
inline BryantSurface associate_family(const BryantSurface& surf, double theta,
                                      const Tolerances& tol = default_tol()) {
  if (surf.horosphere() || !surf.secondary().valid())
    throw InvalidArgument(
        "associate_family: undefined for the umbilic (horosphere) case");
  const AnalyticMap& G = surf.gauss_map();
  const AnalyticMap& q = surf.hopf_coefficient();
  {
    double worst = 0.0;
    for (int i = 0; i < 17; ++i) {
      const double s = surf.domain().s_min +
                       (surf.domain().s_max - surf.domain().s_min) * i / 16.0;
      worst = std::max(worst, std::abs(q.value(complex(s))));
    }
    if (worst < 1e-12)
      throw InvalidArgument(
          "associate_family: the Hopf coefficient vanishes identically");
  }
  const complex rot = std::exp(complex(0.0, theta));
  const double s0 = 0.5 * (surf.domain().s_min + surf.domain().s_max);
  const Jet jg = G.jet(complex(s0), 2);
  if (std::abs(jg.derivative(1)) < 1e-13)
    throw DegeneratePoint("associate_family: G'(s0) = 0; move the base point");
  const SchwarzianInit init{jg.value(), jg.derivative(1), jg.derivative(2)};
  ProjectivePair gt =
      solve_schwarzian(schwarzian_rhs(G, q, complex(1.0) - rot), complex(s0),
                       init, tol);
  AnalyticMap Gt = gt.as_map();
  AnalyticMap qt = map_scale(rot, q);
  LiftMap F = small_lift(surf.secondary(), Gt, tol);
  BryantSurface out(std::move(Gt), surf.secondary(), std::move(qt),
                    std::move(F), nullptr, surf.domain(), std::nullopt, false,
                    tol);
  out.set_normal_sign(surf.normal_sign());
  return out;
}

// ---------------------------------------------------------------------------
// Symmetry / periodicity / closure checks.
// ---------------------------------------------------------------------------

/// Largest deviation |psi(Psi(z)) - Phi . psi(z)| over the grid, where Phi
/// acts by the induced Lorentz map and Psi is a parameter reindexing whose
/// image must stay inside the surface domain.  Masked or out-of-domain
/// nodes are skipped; throws EmptyGrid when nothing remains.
inline double symmetry_check(const BryantSurface& surf, const SL2C& phi,
                             const AnalyticMap& reindex, const Rect& rect,
                             int ns = 17, int nt = 9,
                             const Tolerances& tol = default_tol()) {
  const auto A = sl2c_to_so13(phi, tol);
  double worst = 0.0;
  int used = 0;
  for (int it = 0; it < nt; ++it) {
    const double t =
        nt == 1 ? rect.t_min
                : rect.t_min + (rect.t_max - rect.t_min) * it / double(nt - 1);
    for (int is = 0; is < ns; ++is) {
      const double s =
          ns == 1
              ? rect.s_min
              : rect.s_min + (rect.s_max - rect.s_min) * is / double(ns - 1);
      try {
        const complex zi = reindex.value(complex(s, t));
        if (!surf.domain().contains(zi, 1e-9)) continue;
        const LVec4 lhs = surf.psi(zi.real(), zi.imag());
        const LVec4 rhs = apply_so13(A, surf.psi(s, t));
        worst = std::max(worst, euclid_norm(lhs - rhs));
        ++used;
      } catch (const Error&) {
        continue;
      }
    }
  }
  if (used == 0) throw EmptyGrid("symmetry_check: no usable grid node");
  return worst;
}

/// Periodicity report: compares psi across one period of the data and
/// checks whether the secondary Gauss map itself closes up (so the lift is
/// single-valued on the quotient).
struct PeriodReport {
  bool has_period = false;
  double period = 0.0;
  double max_deviation = 0.0;  ///< max |psi(s+T,t) - psi(s,t)|
  bool psi_periodic = false;
  double g_monodromy = 0.0;  ///< max relative |g(z+T) - g(z)| at samples
  bool lift_single_valued = false;
  std::string verdict;
};

inline PeriodReport period_check(const BryantSurface& surf, int ns = 17,
                                 int nt = 5,
                                 const Tolerances& tol = default_tol()) {
  (void)tol;
  PeriodReport out;
  if (!surf.period()) {
    out.verdict = "NotPeriodic";
    return out;
  }
  out.has_period = true;
  out.period = *surf.period();
  const Rect& dom = surf.domain();
  int used = 0;
  for (int it = 0; it < nt; ++it) {
    const double t =
        nt == 1 ? dom.t_min
                : dom.t_min + (dom.t_max - dom.t_min) * it / double(nt - 1);
    for (int is = 0; is < ns; ++is) {
      const double s = dom.s_min + (dom.s_max - dom.s_min) * is /
                                       double(std::max(1, ns - 1));
      try {
        const LVec4 p0 = surf.psi(s, t);
        const LVec4 p1 = surf.psi(s + out.period, t);
        out.max_deviation = std::max(out.max_deviation, euclid_norm(p1 - p0));
        ++used;
      } catch (const Error&) {
        continue;
      }
    }
  }
  if (used == 0) throw EmptyGrid("period_check: no usable grid node");
  out.psi_periodic = out.max_deviation <= 1e-8;
  int gused = 0;
  for (int is = 0; is < ns; ++is) {
    const double s = dom.s_min + (dom.s_max - dom.s_min) * is /
                                     double(std::max(1, ns - 1));
    try {
      if (surf.secondary().valid()) {
        const complex g0 = surf.secondary().as_map().value(complex(s));
        const complex g1 =
            surf.secondary().as_map().value(complex(s + out.period));
        if (!is_finite(g0) || !is_finite(g1)) continue;
        // Chordal metric on the sphere: invariant under the value growing
        // through a pole of g (g is a map into CP^1, poles are not special).
        const double chordal =
            std::abs(g1 - g0) /
            std::sqrt((1.0 + std::norm(g0)) * (1.0 + std::norm(g1)));
        out.g_monodromy = std::max(out.g_monodromy, chordal);
      } else {
        // Closed-form lift (horosphere): compare entries up to overall sign.
        const SL2C F0 = surf.lift().value(complex(s));
        const SL2C F1 = surf.lift().value(complex(s + out.period));
        auto dev = [&](double sg) {
          return std::max(
              std::max(std::abs(F1.a - sg * F0.a), std::abs(F1.b - sg * F0.b)),
              std::max(std::abs(F1.c - sg * F0.c),
                       std::abs(F1.d - sg * F0.d)));
        };
        const double scale = 1.0 + std::max(std::abs(F0.a), std::abs(F0.d));
        out.g_monodromy =
            std::max(out.g_monodromy, std::min(dev(1.0), dev(-1.0)) / scale);
      }
      ++gused;
    } catch (const Error&) {
      continue;
    }
  }
  out.lift_single_valued = gused > 0 && out.g_monodromy <= 1e-8;
  if (!out.psi_periodic)
    out.verdict = "NotPeriodic";
  else if (!out.lift_single_valued)
    out.verdict = "lift not single-valued";
  else
    out.verdict = "periodic";
  return out;
}

/// Closure test for the spherical development of periodic boundary data.
/// The curvature data (speed sqrt(a), geodesic curvature
/// kappa = -Im b / a^{3/2}) is transported over one period: the data lifts
/// to a closed cover exactly when the holonomy angle is a rational multiple
/// of 2 pi.  Identically flat turning (kappa == 0) reduces to the winding
/// test — the total turning must be 2 pi times a rational number — and
/// constant nonzero curvature falls outside the admissible class.
struct ClosureReport {
  bool planar = false;
  double turning = 0.0;  ///< total integral of sqrt(a) (planar branch only)
  HolonomyResult holonomy;
  bool lifts = false;
  int folds = 0;
  std::string verdict;
};

inline ClosureReport lift_closure_test(const BjorlingData& data,
                                       int q_max = 64,
                                       double rational_tol = 1e-6,
                                       const Tolerances& tol = default_tol()) {
  if (!data.period())
    throw InvalidArgument("lift_closure_test: the data must be periodic");
  const double T = *data.period();
  const LiouvilleCauchyData ld = liouville_data(data, tol);
  const AnalyticMap a = ld.a();
  const AnalyticMap b = ld.b();
  const AnalyticMap bc = map_conj(b);
  AnalyticMap kappa(
      [a, b, bc](complex z, int n) {
        const Jet im = complex(0.0, -0.5) * (b.jet(z, n) - bc.jet(z, n));
        const Jet ja = a.jet(z, n);
        return (complex(-1.0) * jet_div(im, ja * jet_sqrt(ja))).truncated(n);
      },
      {}, true);
  double kmin = std::numeric_limits<double>::infinity();
  double kmax = -kmin;
  for (int i = 0; i < 64; ++i) {
    const double s = data.s_min() + T * i / 64.0;
    const double kv = kappa.value(complex(s)).real();
    kmin = std::min(kmin, kv);
    kmax = std::max(kmax, kv);
  }
  const double kscale = std::max(std::abs(kmin), std::abs(kmax));
  ClosureReport out;
  // Continued-fraction convergents p/q of the ratio, denominators <= q_max.
  auto rational_folds =
      [&](double ratio) -> std::optional<std::pair<int, int>> {
    if (std::abs(ratio - std::round(ratio)) <= rational_tol)
      return std::make_pair(int(std::lround(ratio)), 1);
    double x = ratio;
    long p_prev = 1, q_prev = 0;
    long p_cur = (long)std::floor(x), q_cur = 1;
    double frac = x - std::floor(x);
    for (int it = 0; it < 32 && frac > 1e-14; ++it) {
      x = 1.0 / frac;
      const long ai = (long)std::floor(x);
      frac = x - std::floor(x);
      const long p_next = ai * p_cur + p_prev;
      const long q_next = ai * q_cur + q_prev;
      p_prev = p_cur;
      q_prev = q_cur;
      p_cur = p_next;
      q_cur = q_next;
      if (q_cur > q_max) break;
      if (std::abs(ratio - double(p_cur) / double(q_cur)) <= rational_tol)
        return std::make_pair(int(p_cur), int(q_cur));
    }
    return std::nullopt;
  };
  if (kscale <= 1e-9) {
    out.planar = true;
    out.turning = path_integral(map_sqrt(a), complex(data.s_min()),
                                complex(data.s_min() + T), tol)
                      .real();
    if (auto pq = rational_folds(out.turning / (2.0 * kPi))) {
      out.lifts = true;
      out.folds = pq->second;
      out.verdict = "lifts after " + std::to_string(out.folds) +
                    (out.folds == 1 ? " fold" : " folds");
    } else {
      out.verdict = "does not lift at this precision";
    }
    return out;
  }
  if (kmax - kmin <= 1e-9 * (1.0 + kscale))
    throw NotAdmissible(
        "lift_closure_test: constant nonzero curvature is outside the "
        "admissible class");
  // holonomy_S2 samples on [0, T]; shift the data to start at s_min.
  const AnalyticMap w = map_sqrt(a);
  const double off = data.s_min();
  AnalyticMap w_sh(
      [w, off](complex z, int n) {
        return detail::rebased_jet(w.jet(z + off, n), z);
      },
      {}, true);
  AnalyticMap k_sh(
      [kappa, off](complex z, int n) {
        return detail::rebased_jet(kappa.jet(z + off, n), z);
      },
      {}, true);
  out.holonomy =
      holonomy_S2(w_sh, k_sh, T, {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, q_max,
                  rational_tol, tol);
  out.lifts = out.holonomy.closes;
  out.folds = out.holonomy.folds;
  out.verdict = out.lifts ? ("lifts after " + std::to_string(out.folds) +
                             (out.folds == 1 ? " fold" : " folds"))
                          : "does not lift at this precision";
  return out;
}

}  // namespace cmc1
