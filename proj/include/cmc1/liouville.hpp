#pragma once

/** @file liouville.hpp
 *  @brief Cauchy-problem solvers for the elliptic Liouville equation
 *         Delta log(phi) = -2 c phi on a strip around the real axis, with
 *         boundary data phi(s,0) = a(s), phi_t(s,0) = d(s).
 *
 *  Routes provided:
 *   - analytic:   Schwarzian derivative + projective (pole-free) assembly,
 *   - geometric:  Frenet curve in the curvature-c space form Q(c), developing
 *                 map by stereographic projection,
 *   - geodesic:   the d == 0, c == 1 shortcut g = exp(i * integral sqrt(a)),
 *   - modified:   the weighted equation 4 (log rho)_{z zbar} = -rho^2 |f|^2,
 *   - degenerate: c == 0 (harmonic log phi) via a holomorphic factor,
 *   - lightcone:  the null-frame resolution that reads the Schwarzian of the
 *                 developing map off a curve pair (nu, alpha) in the light
 *                 cone, plus the induced Frenet-via-Schwarzian sphere curves.
 *
 *  Also: plane and space-form Frenet integrators and the S^2 holonomy
 *  functional with a rotation-angle rationality verdict.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmc1/analytic.hpp"
#include "cmc1/errors.hpp"
#include "cmc1/jet.hpp"
#include "cmc1/lorentz.hpp"
#include "cmc1/tolerances.hpp"

namespace cmc1 {

// ---------------------------------------------------------------------------
// Map helpers (lift jet functions over maps).
// ---------------------------------------------------------------------------

namespace detail {

inline AnalyticMap map_lift(const AnalyticMap& f,
                            std::function<Jet(const Jet&)> op) {
  return AnalyticMap(
      [f, op = std::move(op)](complex z, int n) {
        return op(f.jet(z, n)).truncated(n);
      },
      f.excluded(), false);
}

}  // namespace detail

inline AnalyticMap map_sqrt(const AnalyticMap& f) {
  return detail::map_lift(f, [](const Jet& j) { return jet_sqrt(j); });
}
inline AnalyticMap map_exp(const AnalyticMap& f) {
  return detail::map_lift(f, [](const Jet& j) { return jet_exp(j); });
}
inline AnalyticMap map_cos(const AnalyticMap& f) {
  return detail::map_lift(f, [](const Jet& j) { return jet_cos(j); });
}
inline AnalyticMap map_sin(const AnalyticMap& f) {
  return detail::map_lift(f, [](const Jet& j) { return jet_sin(j); });
}

// ---------------------------------------------------------------------------
// Cauchy data.
// ---------------------------------------------------------------------------

/// Boundary data for the Liouville Cauchy problem on the interval
/// [s_min, s_max] of the real axis: a(s) = phi(s,0) > 0 and either the
/// normal slope d(s) = phi_t(s,0) (real) or the combined complex datum
/// b = (a' - i d)/2. Both forms are stored; they are mutually inverse.
class LiouvilleCauchyData {
 public:
  static LiouvilleCauchyData from_slope(AnalyticMap a, AnalyticMap d, double c,
                                        double s_min, double s_max) {
    check_interval(s_min, s_max);
    check_real_positive(a, s_min, s_max, "a");
    check_real(d, s_min, s_max, "d");
    // b = (a' - i d) / 2.
    AnalyticMap b = map_scale(
        0.5, map_sub(map_derivative(a), map_scale(complex(0.0, 1.0), d)));
    return LiouvilleCauchyData(std::move(a), std::move(b), std::move(d), c,
                               s_min, s_max);
  }

  static LiouvilleCauchyData from_b(AnalyticMap a, AnalyticMap b, double c,
                                    double s_min, double s_max) {
    check_interval(s_min, s_max);
    check_real_positive(a, s_min, s_max, "a");
    // Compatibility: 2 Re b(s) = a'(s) on the interval.
    const AnalyticMap ap = map_derivative(a);
    for (int i = 0; i < kSamples; ++i) {
      const double s = sample_point(s_min, s_max, i);
      const complex bv = b.value(s);
      const complex av = ap.value(s);
      const double scale = std::max({std::abs(bv), std::abs(av), 1.0});
      if (std::abs(2.0 * bv.real() - av.real()) > 1e-9 * scale)
        throw InvalidArgument(
            "LiouvilleCauchyData: 2 Re b(s) must equal a'(s) on the interval");
    }
    // d = i (b - b*), real on the axis by the relation above.
    AnalyticMap d =
        map_scale(complex(0.0, 1.0), map_sub(b, map_conj(b)));
    return LiouvilleCauchyData(std::move(a), std::move(b), std::move(d), c,
                               s_min, s_max);
  }

  const AnalyticMap& a() const { return a_; }
  const AnalyticMap& b() const { return b_; }
  const AnalyticMap& d() const { return d_; }
  double c() const { return c_; }
  double s_min() const { return s_min_; }
  double s_max() const { return s_max_; }
  /// Base point used by all solvers: the midpoint of the interval.
  double s0() const { return 0.5 * (s_min_ + s_max_); }

 private:
  static constexpr int kSamples = 64;

  LiouvilleCauchyData(AnalyticMap a, AnalyticMap b, AnalyticMap d, double c,
                      double s_min, double s_max)
      : a_(std::move(a)), b_(std::move(b)), d_(std::move(d)), c_(c),
        s_min_(s_min), s_max_(s_max) {}

  static double sample_point(double lo, double hi, int i) {
    return lo + (hi - lo) * (i + 0.5) / kSamples;
  }

  static void check_interval(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw InvalidArgument("LiouvilleCauchyData: empty or invalid interval");
  }

  static void check_real_positive(const AnalyticMap& a, double lo, double hi,
                                  const char* name) {
    for (int i = 0; i < kSamples; ++i) {
      const double s = sample_point(lo, hi, i);
      const complex v = a.value(s);
      const double scale = std::max(1.0, std::abs(v));
      if (!is_finite(v) || std::abs(v.imag()) > 1e-9 * scale)
        throw InvalidArgument(std::string("LiouvilleCauchyData: ") + name +
                              " must be real-valued on the interval");
      if (!(v.real() > 0.0))
        throw DegenerateData(std::string("LiouvilleCauchyData: ") + name +
                             " must be positive on the interval");
    }
  }

  static void check_real(const AnalyticMap& d, double lo, double hi,
                         const char* name) {
    for (int i = 0; i < kSamples; ++i) {
      const double s = sample_point(lo, hi, i);
      const complex v = d.value(s);
      const double scale = std::max(1.0, std::abs(v));
      if (!is_finite(v) || std::abs(v.imag()) > 1e-9 * scale)
        throw InvalidArgument(std::string("LiouvilleCauchyData: ") + name +
                              " must be real-valued on the interval");
    }
  }

  AnalyticMap a_, b_, d_;
  double c_ = 1.0;
  double s_min_ = 0.0, s_max_ = 0.0;
};

// ---------------------------------------------------------------------------
// Solution field.
// ---------------------------------------------------------------------------

/// A solved Cauchy problem. The field is evaluated through its bivariate
/// holomorphic extension Phi(z, zeta) with phi(s,t) = Re Phi(s+it, s-it);
/// evaluation throws PoleSignal / StepFailure / DenominatorVanishes at
/// masked points (grid sampling converts these into masked cells).
class LiouvilleSolution {
 public:
  using Extension = std::function<complex(complex, complex)>;

  LiouvilleSolution(Extension eval, LiouvilleCauchyData data,
                    std::string provenance, AnalyticMap developing_map,
                    std::optional<ProjectivePair> pair = std::nullopt,
                    AnalyticMap holomorphic_factor = AnalyticMap())
      : eval_(std::move(eval)), data_(std::move(data)),
        provenance_(std::move(provenance)), g_(std::move(developing_map)),
        pair_(std::move(pair)), f_(std::move(holomorphic_factor)) {}

  /// Bivariate extension Phi(z, zeta); Phi(z, conj z) is the field.
  complex extension(complex z, complex zeta) const { return eval_(z, zeta); }

  /// Field value phi(s, t); throws at masked points.
  double phi(double s, double t) const {
    const complex z(s, t);
    const complex v = eval_(z, std::conj(z));
    if (!is_finite(v))
      throw StepFailure("LiouvilleSolution: non-finite field value");
    return v.real();
  }

  /// |Im Phi(z, conj z)|: should vanish for real data (diagnostic).
  double hermitian_defect(double s, double t) const {
    const complex z(s, t);
    return std::abs(eval_(z, std::conj(z)).imag());
  }

  const std::string& provenance() const { return provenance_; }
  double c() const { return data_.c(); }
  const LiouvilleCauchyData& data() const { return data_; }

  /// Developing map g with phi = 4 |g'|^2 / (1 + c |g|^2)^2; absent for c=0.
  const AnalyticMap& developing_map() const {
    if (!g_.valid())
      throw InvalidArgument(
          "LiouvilleSolution: no developing map for this solution (c == 0)");
    return g_;
  }
  bool has_developing_map() const { return g_.valid(); }

  /// Homogeneous representation of g when the solver produced one.
  const std::optional<ProjectivePair>& projective_pair() const {
    return pair_;
  }

  /// Holomorphic factor f with phi = |f|^2 (degenerate route only).
  const AnalyticMap& holomorphic_factor() const {
    if (!f_.valid())
      throw InvalidArgument(
          "LiouvilleSolution: no holomorphic factor for this solution");
    return f_;
  }

  /// Sample the field on a rectangle; failures become masked cells.
  Grid sample(const Rect& rect, int ns, int nt) const {
    if (ns < 1 || nt < 1)
      throw EmptyGrid("LiouvilleSolution::sample: grid must be non-empty");
    Grid g;
    g.rect = rect;
    g.ns = ns;
    g.nt = nt;
    g.cells.assign(static_cast<size_t>(ns) * nt, GridCell{});
    for (int it = 0; it < nt; ++it) {
      for (int is = 0; is < ns; ++is) {
        GridCell& cell = g.at(is, it);
        try {
          cell.value = complex(phi(g.s(is), g.t(it)), 0.0);
        } catch (const Error&) {
          cell.masked = true;
        }
      }
    }
    return g;
  }

  /// max_s |phi(s,0) - a(s)| over n samples of the data interval.
  double max_boundary_value_error(int n = 201) const {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = data_.s_min() +
                       (data_.s_max() - data_.s_min()) * i / double(n - 1);
      worst = std::max(worst,
                       std::abs(phi(s, 0.0) - data_.a().value(s).real()));
    }
    return worst;
  }

  /// max_s |phi_t(s,0) - d(s)| by central differences with step h.
  double max_boundary_slope_error(int n = 201, double h = 1e-4) const {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = data_.s_min() +
                       (data_.s_max() - data_.s_min()) * i / double(n - 1);
      const double slope = (phi(s, h) - phi(s, -h)) / (2.0 * h);
      worst = std::max(worst, std::abs(slope - data_.d().value(s).real()));
    }
    return worst;
  }

  /// max |Delta log phi + 2 c phi| over an ns x nt grid, using fourth-order
  /// five-point second-difference stencils per axis with step h. Nodes where
  /// any stencil evaluation fails (mask) or phi <= 0 are skipped.
  double max_interior_residual(const Rect& rect, int ns, int nt,
                               double h = 1e-3) const {
    static const double w[5] = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0,
                                16.0 / 12.0, -1.0 / 12.0};
    double worst = 0.0;
    int evaluated = 0;
    for (int it = 0; it < nt; ++it) {
      const double t = nt == 1 ? rect.t_min
                               : rect.t_min + (rect.t_max - rect.t_min) * it /
                                                  double(nt - 1);
      for (int is = 0; is < ns; ++is) {
        const double s = ns == 1 ? rect.s_min
                                 : rect.s_min + (rect.s_max - rect.s_min) *
                                                    is / double(ns - 1);
        try {
          double lp[5], lt[5];
          bool ok = true;
          for (int k = -2; k <= 2; ++k) {
            const double ps = phi(s + k * h, t);
            const double pt = phi(s, t + k * h);
            if (!(ps > 0.0) || !(pt > 0.0)) {
              ok = false;
              break;
            }
            lp[k + 2] = std::log(ps);
            lt[k + 2] = std::log(pt);
          }
          if (!ok) continue;
          double lap = 0.0;
          for (int k = 0; k < 5; ++k) lap += w[k] * (lp[k] + lt[k]);
          lap /= h * h;
          const double res = std::abs(lap + 2.0 * data_.c() * phi(s, t));
          worst = std::max(worst, res);
          ++evaluated;
        } catch (const Error&) {
          continue;  // masked node
        }
      }
    }
    if (evaluated == 0)
      throw EmptyGrid(
          "LiouvilleSolution::max_interior_residual: every node masked");
    return worst;
  }

 private:
  Extension eval_;
  LiouvilleCauchyData data_;
  std::string provenance_;
  AnalyticMap g_;
  std::optional<ProjectivePair> pair_;
  AnalyticMap f_;
};

// ---------------------------------------------------------------------------
// Shared assembly kernels.
// ---------------------------------------------------------------------------

namespace detail {

/// Pole-free field extension from the homogeneous pair: with y'' + (U/2)y = 0,
/// hat(y) = 2 y' + (b/a) y and constant Wronskian omega = y1' y2 - y1 y2',
///   Phi(z, zeta) = 4 omega^2 a(zeta) / D(z, zeta)^2,
///   D(z, zeta)   = y2(z) hat(y1)(zeta) - y1(z) hat(y2)(zeta).
/// On the diagonal D(z, z) = 2 omega, so Phi(s, s) = a(s) exactly.
inline LiouvilleSolution::Extension projective_extension(
    const ProjectivePair& pair, const AnalyticMap& a, const AnalyticMap& roa,
    complex omega) {
  return [pair, a, roa, omega](complex z, complex zeta) -> complex {
    const auto [y1z, y2z] = pair.pair_jet(z, 0);
    const auto [y1c, y2c] = pair.pair_jet(zeta, 1);
    const complex r = roa.value(zeta);
    const complex h1 = 2.0 * y1c.derivative(1) + r * y1c.value();
    const complex h2 = 2.0 * y2c.derivative(1) + r * y2c.value();
    const complex d = y2z.value() * h1 - y1z.value() * h2;
    const double scale = std::abs(y2z.value() * h1) +
                         std::abs(y1z.value() * h2) + 1e-300;
    if (std::abs(d) < 1e-13 * scale)
      throw DenominatorVanishes(
          "Liouville field: projective denominator vanishes");
    const complex q = omega / d;
    return 4.0 * q * q * a.value(zeta);
  };
}

/// Field extension straight from a developing map:
///   Phi(z, zeta) = 4 g'(z) g*'(zeta) / (1 + c g(z) g*(zeta))^2.
inline LiouvilleSolution::Extension map_extension(const AnalyticMap& g,
                                                  double c) {
  const AnalyticMap gc = map_conj(g);
  return [g, gc, c](complex z, complex zeta) -> complex {
    const Jet jz = g.jet(z, 1);
    const Jet jc = gc.jet(zeta, 1);
    const complex den = 1.0 + c * jz.value() * jc.value();
    const double scale =
        1.0 + std::abs(c) * std::abs(jz.value()) * std::abs(jc.value());
    if (std::abs(den) < 1e-13 * scale)
      throw DenominatorVanishes("Liouville field: 1 + c g g* vanishes");
    return 4.0 * jz.derivative(1) * jc.derivative(1) / (den * den);
  };
}

/// Canonical Schwarzian initial jet at s0: g(s0) = 0, g'(s0) = sqrt(a)/2,
/// g''(s0) = g'(s0) * (b/a)(s0). This pins the developing map so that the
/// assembled field meets both boundary conditions exactly.
inline SchwarzianInit canonical_init(const LiouvilleCauchyData& data) {
  const double s0 = data.s0();
  const complex a0 = data.a().value(s0);
  const complex g1 = 0.5 * std::sqrt(a0.real());
  const complex g2 = g1 * data.b().value(s0) / a0;
  return SchwarzianInit{complex(0.0), g1, g2};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Analytic (Schwarzian) route.
// ---------------------------------------------------------------------------

/// Coefficient map 2 Upsilon = 2 (b/a)' - (b/a)^2 + c a, the Schwarzian of
/// every developing map of the solution.
inline AnalyticMap liouville_upsilon(const LiouvilleCauchyData& data) {
  const AnalyticMap roa = map_div(data.b(), data.a());
  const AnalyticMap a = data.a();
  const double c = data.c();
  return AnalyticMap(
      [roa, a, c](complex z, int n) {
        const Jet r = roa.jet(z, n + 1);
        const Jet rp = r.derivative_jet();
        const Jet ja = a.jet(z, n);
        return (rp - 0.5 * r * r + (0.5 * c) * ja).truncated(n);
      },
      roa.excluded(), false);
}

/// Solve the Cauchy problem by the Schwarzian route (c != 0): solve
/// {g, z} = Upsilon with the canonical initial jet and assemble the field
/// through the pole-free projective extension.
inline LiouvilleSolution solve_cauchy_analytic(
    const LiouvilleCauchyData& data, const Tolerances& tol = default_tol()) {
  if (data.c() == 0.0)
    throw InvalidArgument("solve_cauchy_analytic: c must be nonzero");
  const AnalyticMap ups = liouville_upsilon(data);
  const SchwarzianInit init = detail::canonical_init(data);
  ProjectivePair pair = solve_schwarzian(ups, data.s0(), init, tol);
  const AnalyticMap roa = map_div(data.b(), data.a());
  auto eval = detail::projective_extension(pair, data.a(), roa, init.g1);
  AnalyticMap g = pair.as_map();
  return LiouvilleSolution(std::move(eval), data, "analytic", std::move(g),
                           std::move(pair));
}

// ---------------------------------------------------------------------------
// Frenet integration in the space form Q(c).
// ---------------------------------------------------------------------------

namespace detail {

using Vec3C = std::array<complex, 3>;

/// Bilinear cross product on the complexified tangent algebra of Q(c):
/// Euclidean for c > 0, Lorentzian for c < 0. The sign of the Lorentzian
/// variant is fixed so that the assembled field meets the prescribed normal
/// slope on both signs of c with the same curvature convention.
inline Vec3C cross_qc(double c, const Vec3C& u, const Vec3C& v) {
  const complex m0 = u[1] * v[2] - u[2] * v[1];
  const complex m1 = u[2] * v[0] - u[0] * v[2];
  const complex m2 = u[0] * v[1] - u[1] * v[0];
  if (c > 0.0) return {m0, m1, m2};
  return {m0, -m1, -m2};
}

/// Bilinear inner product of signature (+,+,+) for c > 0, (-,+,+) for c < 0.
inline complex inner_qc(double c, const Vec3C& u, const Vec3C& v) {
  const double sgn = c > 0.0 ? 1.0 : -1.0;
  return sgn * u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

/// Taylor table of the second-order Frenet system
///   alpha'' = p alpha' + q (alpha x alpha') + r alpha
/// from coefficient jets p, q, r at the expansion point and the local state
/// (alpha, alpha'). Returns coefficients A[k] of alpha up to order n.
inline std::vector<Vec3C> frenet_coeffs(double c, const Jet& p, const Jet& q,
                                        const Jet& r, const Vec3C& a0,
                                        const Vec3C& a1, int n) {
  std::vector<Vec3C> A(static_cast<size_t>(n) + 1, Vec3C{});
  std::vector<Vec3C> X;  // cross-term coefficients (alpha x alpha')_k
  X.reserve(std::max(0, n - 1));
  A[0] = a0;
  if (n >= 1) A[1] = a1;
  for (int k = 0; k + 2 <= n; ++k) {
    Vec3C xk{};
    for (int i = 0; i <= k; ++i) {
      const int l = k - i;
      const Vec3C ap{double(l + 1) * A[l + 1][0], double(l + 1) * A[l + 1][1],
                     double(l + 1) * A[l + 1][2]};
      const Vec3C cr = cross_qc(c, A[i], ap);
      for (int t = 0; t < 3; ++t) xk[t] += cr[t];
    }
    X.push_back(xk);
    Vec3C acc{};
    for (int j = 0; j <= k; ++j) {
      const complex pj = p[j], qj = q[j], rj = r[j];
      const double m = double(k - j + 1);
      for (int t = 0; t < 3; ++t)
        acc[t] += pj * m * A[k - j + 1][t] + qj * X[k - j][t] +
                  rj * A[k - j][t];
    }
    const double den = double(k + 1) * double(k + 2);
    for (int t = 0; t < 3; ++t) A[k + 2][t] = acc[t] / den;
  }
  return A;
}

/// Adaptive Taylor continuation of the Frenet system from the base point.
/// Pure: every query re-marches from the seed, so results are reproducible.
struct FrenetMarcher {
  double c = 1.0;
  AnalyticMap u, kappa;
  double s0 = 0.0;
  Vec3C a0{}, a1{};
  Tolerances tol{};

  /// Coefficient jets of the first-order data at zc. The three inputs enter
  /// only through branch-invariant combinations of w = u': p = w'/w,
  /// q = -sqrt|c| kappa w, r = -c w^2.
  void system_jets(complex zc, int n, Jet& p, Jet& q, Jet& r) const {
    const Jet ju = u.jet(zc, n + 2);
    const Jet jw = ju.derivative_jet();
    const Jet jk = kappa.jet(zc, n);
    p = jet_div(jw.derivative_jet(), jw).truncated(n);
    q = ((jk * jw) * complex(-std::sqrt(std::abs(c)))).truncated(n);
    r = ((jw * jw) * complex(-c)).truncated(n);
  }

  void march(complex& zc, Vec3C& a, Vec3C& ap, complex z_target) const {
    const int n = tol.ode_order;
    int guard = 0;
    while (zc != z_target) {
      if (++guard > 100000)
        throw StepFailure("FrenetMarcher: step count exploded on path");
      const complex dir = z_target - zc;
      const double dist = std::abs(dir);
      Jet p(zc, 0), q(zc, 0), r(zc, 0);
      system_jets(zc, n, p, q, r);
      const std::vector<Vec3C> A = frenet_coeffs(c, p, q, r, a, ap, n);
      auto row_norm = [&](int k) {
        return std::max({std::abs(A[k][0]), std::abs(A[k][1]),
                         std::abs(A[k][2])});
      };
      const double scale = std::max({row_norm(0), row_norm(1), 1e-300});
      double h = std::numeric_limits<double>::infinity();
      for (int k = n - 2; k <= n; ++k) {
        const double ck = row_norm(k);
        if (ck > 0.0)
          h = std::min(h, std::pow(tol.ode_step * scale / ck, 1.0 / double(k)));
      }
      h *= 0.9;
      complex step;
      bool arrives = false;
      if (!(h < dist)) {
        step = dir;
        arrives = true;
      } else {
        if (h < 1e-13 * (1.0 + std::abs(zc)))
          throw StepFailure(
              "FrenetMarcher: Taylor radius collapsed on the path");
        step = dir / dist * h;
      }
      Vec3C na{}, nap{};
      for (int t = 0; t < 3; ++t) {
        complex acc = A[n][t];
        complex accp = A[n][t] * double(n);
        for (int k = n - 1; k >= 1; --k) {
          acc = acc * step + A[k][t];
          accp = accp * step + A[k][t] * double(k);
        }
        na[t] = acc * step + A[0][t];
        nap[t] = accp;
      }
      a = na;
      ap = nap;
      zc = arrives ? z_target : zc + step;
    }
  }

  std::array<Jet, 3> jets(complex z, int order) const {
    complex zc = s0;
    Vec3C a = a0, ap = a1;
    march(zc, a, ap, z);
    const int n = std::max(order, 2);
    Jet p(z, 0), q(z, 0), r(z, 0);
    system_jets(z, n, p, q, r);
    const std::vector<Vec3C> A = frenet_coeffs(c, p, q, r, a, ap, n);
    std::array<Jet, 3> out{Jet(z, order), Jet(z, order), Jet(z, order)};
    for (int t = 0; t < 3; ++t) {
      std::vector<complex> coeffs(static_cast<size_t>(order) + 1);
      for (int k = 0; k <= order; ++k) coeffs[k] = A[k][t];
      out[t] = Jet(z, std::move(coeffs));
    }
    return out;
  }
};

}  // namespace detail

/// Initial frame for Frenet integration: base parameter, position, and unit
/// tangent (with respect to the Q(c) inner product).
struct FrenetFrame {
  double s0 = 0.0;
  std::array<double, 3> alpha0{};
  std::array<double, 3> tangent0{};
};

/// Canonical frame: for c > 0 start at (-1/sqrt(c), 0, 0); for c < 0 start
/// on the upper hyperboloid sheet (+1/sqrt(-c), 0, 0); tangent (0, 1, 0).
inline FrenetFrame default_frenet_frame(double c, double s0 = 0.0) {
  if (c == 0.0)
    throw InvalidArgument("default_frenet_frame: c must be nonzero");
  const double r = 1.0 / std::sqrt(std::abs(c));
  FrenetFrame f;
  f.s0 = s0;
  f.alpha0 = {c > 0.0 ? -r : r, 0.0, 0.0};
  f.tangent0 = {0.0, 1.0, 0.0};
  return f;
}

/// A curve in the space form Q(c) (c != 0) or the plane (c == 0), with its
/// arclength map u and geodesic curvature map kappa. Component jets at
/// complex parameters support analytic continuation of derived maps.
class SpaceFormCurve {
 public:
  using JetEval = std::function<std::array<Jet, 3>(complex, int)>;

  SpaceFormCurve() = default;
  SpaceFormCurve(double c, AnalyticMap u, AnalyticMap kappa, double s0,
                 JetEval eval)
      : c_(c), u_(std::move(u)), kappa_(std::move(kappa)), s0_(s0),
        eval_(std::move(eval)) {}

  double c() const { return c_; }
  double base() const { return s0_; }
  const AnalyticMap& u() const { return u_; }
  const AnalyticMap& kappa() const { return kappa_; }

  std::array<Jet, 3> alpha_jet(complex z, int order) const {
    if (!eval_) throw InvalidArgument("SpaceFormCurve: empty curve");
    return eval_(z, order);
  }

  std::array<double, 3> alpha(double s) const {
    const auto j = alpha_jet(s, 0);
    return {j[0].value().real(), j[1].value().real(), j[2].value().real()};
  }

  std::array<double, 3> alpha_prime(double s) const {
    const auto j = alpha_jet(s, 1);
    return {j[0].derivative(1).real(), j[1].derivative(1).real(),
            j[2].derivative(1).real()};
  }

  /// |<alpha, alpha> - 1/c| at s, relative to the component magnitude (the
  /// Lorentzian form cancels catastrophically on large hyperbolic arcs, so an
  /// absolute measure would report pure roundoff). Zero for plane curves.
  double membership_error(double s) const {
    if (c_ == 0.0) return 0.0;
    const auto j = alpha_jet(s, 0);
    const detail::Vec3C a{j[0].value(), j[1].value(), j[2].value()};
    const double mag = std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]);
    return std::abs(detail::inner_qc(c_, a, a) - 1.0 / c_) /
           std::max(1.0, mag);
  }

  /// |<alpha', alpha'> - u'^2| at s relative to max(|u'|^2, |alpha'|^2):
  /// unit speed in the arclength u.
  double speed_error(double s) const {
    const auto j = alpha_jet(s, 1);
    const detail::Vec3C ap{j[0].derivative(1), j[1].derivative(1),
                           j[2].derivative(1)};
    const complex w = u_.jet(s, 1).derivative(1);
    const complex sp = c_ == 0.0 ? ap[0] * ap[0] + ap[1] * ap[1]
                                 : detail::inner_qc(c_, ap, ap);
    const double mag = std::norm(ap[0]) + std::norm(ap[1]) + std::norm(ap[2]);
    return std::abs(sp - w * w) / std::max(std::norm(w), mag);
  }

 private:
  double c_ = 0.0;
  AnalyticMap u_, kappa_;
  double s0_ = 0.0;
  JetEval eval_;
};

/// Integrate the Frenet system of a curve in Q(c) with prescribed arclength
/// u(s) and geodesic curvature kappa(s):
///   alpha'' = (w'/w) alpha' - sqrt|c| kappa w (alpha x alpha') - c w^2 alpha
/// with w = u'. The normal convention is n = -sqrt|c| (alpha x alpha_u),
/// which ties the sign of kappa to the normal slope of the assembled field.
inline SpaceFormCurve frenet_integrate_Qc(double c, const AnalyticMap& u,
                                          const AnalyticMap& kappa,
                                          const FrenetFrame& frame,
                                          const Tolerances& tol = default_tol()) {
  if (c == 0.0)
    throw InvalidArgument("frenet_integrate_Qc: c must be nonzero");
  // Frame admissibility: position on Q(c), tangent unit and orthogonal.
  auto to_c = [](const std::array<double, 3>& v) {
    return detail::Vec3C{complex(v[0]), complex(v[1]), complex(v[2])};
  };
  const detail::Vec3C p0 = to_c(frame.alpha0);
  const detail::Vec3C t0 = to_c(frame.tangent0);
  const double memb = std::abs(detail::inner_qc(c, p0, p0) - 1.0 / c);
  const double unit = std::abs(detail::inner_qc(c, t0, t0) - 1.0);
  const double orth = std::abs(detail::inner_qc(c, p0, t0));
  const double scale = std::max(1.0, 1.0 / std::abs(c));
  if (memb > 1e-9 * scale || unit > 1e-9 || orth > 1e-9)
    throw InvalidArgument(
        "frenet_integrate_Qc: initial frame is not an adapted Q(c) frame");

  detail::FrenetMarcher m;
  m.c = c;
  m.u = u;
  m.kappa = kappa;
  m.s0 = frame.s0;
  m.a0 = p0;
  const complex w0 = u.jet(frame.s0, 1).derivative(1);
  m.a1 = {w0 * t0[0], w0 * t0[1], w0 * t0[2]};
  m.tol = tol;
  auto eval = [m](complex z, int order) { return m.jets(z, order); };
  return SpaceFormCurve(c, u, kappa, frame.s0, std::move(eval));
}

/// Plane curve with prescribed curvature: theta = integral kappa,
/// alpha = (integral cos theta, integral sin theta), unit speed.
inline SpaceFormCurve frenet_integrate_R2(const AnalyticMap& kappa, double s0,
                                          const Tolerances& tol = default_tol()) {
  const AnalyticMap theta = map_integral(kappa, s0, 0.0, tol);
  const AnalyticMap x = map_integral(map_cos(theta), s0, 0.0, tol);
  const AnalyticMap y = map_integral(map_sin(theta), s0, 0.0, tol);
  AnalyticMap u(
      [s0](complex z, int n) {
        Jet j = Jet::variable(z, n);
        return j - complex(s0);
      },
      {}, true);
  auto eval = [x, y](complex z, int order) {
    return std::array<Jet, 3>{x.jet(z, order), y.jet(z, order),
                              Jet::constant(0.0, z, order)};
  };
  return SpaceFormCurve(0.0, u, kappa, s0, std::move(eval));
}

/// Solve the Cauchy problem by the geometric route (c != 0): integrate the
/// Frenet curve with arclength u = integral sqrt(a) and geodesic curvature
/// kappa = -d / (2 a^{3/2}), develop by stereographic projection and
/// assemble the field from the developing map.
inline LiouvilleSolution solve_cauchy_geometric(
    const LiouvilleCauchyData& data, const Tolerances& tol = default_tol()) {
  if (data.c() == 0.0)
    throw InvalidArgument("solve_cauchy_geometric: c must be nonzero");
  const double c = data.c();
  const double s0 = data.s0();
  const AnalyticMap w = map_sqrt(data.a());
  const AnalyticMap u = map_integral(w, s0, 0.0, tol);
  const AnalyticMap a_map = data.a();
  const AnalyticMap d_map = data.d();
  // kappa = -d / (2 w^3); built from the same local sqrt jet as the marcher
  // so that only branch-invariant combinations ever enter the system.
  AnalyticMap kappa(
      [a_map, d_map](complex z, int n) {
        const Jet ja = a_map.jet(z, n);
        const Jet jd = d_map.jet(z, n);
        const Jet jw = jet_sqrt(ja);
        return (jet_div(jd, jw * jw * jw) * complex(-0.5)).truncated(n);
      },
      a_map.excluded(), false);
  SpaceFormCurve curve =
      frenet_integrate_Qc(c, u, kappa, default_frenet_frame(c, s0), tol);

  // Developing map: stereographic image (alpha1 + i alpha2) / (1 - sigma alpha0).
  const double sigma = (c > 0.0 ? 1.0 : -1.0) * std::sqrt(std::abs(c));
  AnalyticMap g(
      [curve, sigma](complex z, int n) {
        const auto j = curve.alpha_jet(z, n);
        const Jet num = j[1] + complex(0.0, 1.0) * j[2];
        const Jet den = complex(1.0) - complex(sigma) * j[0];
        return jet_div(num, den);
      },
      {}, false);
  auto eval = detail::map_extension(g, c);
  return LiouvilleSolution(std::move(eval), data, "geometric", std::move(g));
}

/// Geodesic shortcut for c = 1 and d == 0: g = exp(i * integral sqrt(a)).
inline LiouvilleSolution solve_cauchy_geodesic(
    const AnalyticMap& a, double s_min, double s_max,
    const Tolerances& tol = default_tol()) {
  LiouvilleCauchyData data = LiouvilleCauchyData::from_slope(
      a, map_constant(0.0), 1.0, s_min, s_max);
  const double s0 = data.s0();
  const AnalyticMap w = map_sqrt(a);
  const AnalyticMap iu =
      map_scale(complex(0.0, 1.0), map_integral(w, s0, 0.0, tol));
  const AnalyticMap g = map_exp(iu);
  auto eval = detail::map_extension(g, 1.0);
  return LiouvilleSolution(std::move(eval), data, "geodesic", g);
}

// ---------------------------------------------------------------------------
// Degenerate route (c == 0).
// ---------------------------------------------------------------------------

/// Solve the degenerate problem Delta log phi = 0: with
/// theta(z) = -1/2 * integral_{s0}^{z} d/a, the field is phi = |f|^2 for the
/// holomorphic factor f = sqrt(a) exp(i theta).
inline LiouvilleSolution solve_degenerate(
    const AnalyticMap& a, const AnalyticMap& d, double s_min, double s_max,
    const Tolerances& tol = default_tol()) {
  LiouvilleCauchyData data =
      LiouvilleCauchyData::from_slope(a, d, 0.0, s_min, s_max);
  const double s0 = data.s0();
  const AnalyticMap theta = map_scale(
      -0.5, map_integral(map_div(d, a), s0, 0.0, tol));
  const AnalyticMap f = map_mul(
      map_sqrt(a), map_exp(map_scale(complex(0.0, 1.0), theta)));
  const AnalyticMap fc = map_conj(f);
  auto eval = [f, fc](complex z, complex zeta) -> complex {
    return f.value(z) * fc.value(zeta);
  };
  return LiouvilleSolution(std::move(eval), data, "degenerate", AnalyticMap(),
                           std::nullopt, f);
}

// ---------------------------------------------------------------------------
// Modified equation 4 (log rho)_{z zbar} = -rho^2 |f|^2.
// ---------------------------------------------------------------------------

/// Solution of the modified problem: rho = sqrt(phi)/|f| where phi solves
/// the c = 1 problem with data a = v^2 |f|^2, b = 2 v w |f|^2 + v^2 f' f*.
class ModifiedSolution {
 public:
  ModifiedSolution(LiouvilleSolution phi, AnalyticMap v, AnalyticMap f)
      : phi_(std::move(phi)), v_(std::move(v)), f_(std::move(f)) {}

  const LiouvilleSolution& field() const { return phi_; }
  const AnalyticMap& f() const { return f_; }

  double rho(double s, double t) const {
    const double p = phi_.phi(s, t);
    const double fm = std::abs(f_.value(complex(s, t)));
    if (!(p >= 0.0) || fm < 1e-300)
      throw DenominatorVanishes("ModifiedSolution: rho undefined here");
    return std::sqrt(p) / fm;
  }

  /// max_s |rho(s,0) - v(s)|.
  double max_boundary_error(int n = 201) const {
    double worst = 0.0;
    const auto& dat = phi_.data();
    for (int i = 0; i < n; ++i) {
      const double s =
          dat.s_min() + (dat.s_max() - dat.s_min()) * i / double(n - 1);
      worst = std::max(worst, std::abs(rho(s, 0.0) - v_.value(s).real()));
    }
    return worst;
  }

  /// max |Delta log rho + rho^2 |f|^2| with fourth-order stencils, step h.
  double max_residual(const Rect& rect, int ns, int nt, double h = 1e-3) const {
    static const double w[5] = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0,
                                16.0 / 12.0, -1.0 / 12.0};
    double worst = 0.0;
    int evaluated = 0;
    for (int it = 0; it < nt; ++it) {
      const double t = nt == 1 ? rect.t_min
                               : rect.t_min + (rect.t_max - rect.t_min) * it /
                                                  double(nt - 1);
      for (int is = 0; is < ns; ++is) {
        const double s = ns == 1 ? rect.s_min
                                 : rect.s_min + (rect.s_max - rect.s_min) *
                                                    is / double(ns - 1);
        try {
          double lp[5], lt[5];
          bool ok = true;
          for (int k = -2; k <= 2; ++k) {
            const double rs = rho(s + k * h, t);
            const double rt = rho(s, t + k * h);
            if (!(rs > 0.0) || !(rt > 0.0)) {
              ok = false;
              break;
            }
            lp[k + 2] = std::log(rs);
            lt[k + 2] = std::log(rt);
          }
          if (!ok) continue;
          double lap = 0.0;
          for (int k = 0; k < 5; ++k) lap += w[k] * (lp[k] + lt[k]);
          lap /= h * h;
          const double r0 = rho(s, t);
          const double fm = std::abs(f_.value(complex(s, t)));
          worst = std::max(worst, std::abs(lap + r0 * r0 * fm * fm));
          ++evaluated;
        } catch (const Error&) {
          continue;
        }
      }
    }
    if (evaluated == 0)
      throw EmptyGrid("ModifiedSolution::max_residual: every node masked");
    return worst;
  }

 private:
  LiouvilleSolution phi_;
  AnalyticMap v_;
  AnalyticMap f_;
};

/// Solve the modified problem with boundary data rho(s,0) = v(s) and complex
/// slope datum w = rho_z(s,0) (so Re w = v'/2 is required for consistency),
/// and weight f (holomorphic, pole-free on the interval).
inline ModifiedSolution solve_modified(const AnalyticMap& v,
                                       const AnalyticMap& w,
                                       const AnalyticMap& f, double s_min,
                                       double s_max,
                                       const Tolerances& tol = default_tol()) {
  const AnalyticMap fc = map_conj(f);
  const AnalyticMap ff = map_mul(f, fc);  // |f|^2 on the axis
  const AnalyticMap a = map_mul(map_mul(v, v), ff);
  const AnalyticMap b = map_add(
      map_scale(2.0, map_mul(map_mul(v, w), ff)),
      map_mul(map_mul(v, v), map_mul(map_derivative(f), fc)));
  LiouvilleCauchyData data =
      LiouvilleCauchyData::from_b(a, b, 1.0, s_min, s_max);
  LiouvilleSolution phi = solve_cauchy_analytic(data, tol);
  return ModifiedSolution(std::move(phi), v, f);
}

// ---------------------------------------------------------------------------
// Light-cone route (c == 1).
// ---------------------------------------------------------------------------

/// Which of the two admissible null companions to follow: "upper" takes the
/// larger fourth component at the base point.
enum class FBranch { upper, lower };

namespace detail {

using Vec4J = std::array<Jet, 4>;

inline Jet inner4_jet(const Vec4J& x, const Vec4J& y) {
  return -(x[0] * y[0]) + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
}

inline Jet det3_jet(const std::array<Jet, 3>& r0, const std::array<Jet, 3>& r1,
                    const std::array<Jet, 3>& r2) {
  return r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) -
         r0[1] * (r1[0] * r2[2] - r1[2] * r2[0]) +
         r0[2] * (r1[0] * r2[1] - r1[1] * r2[0]);
}

inline Jet det4_jet(const Vec4J& r0, const Vec4J& r1, const Vec4J& r2,
                    const Vec4J& r3) {
  Jet acc = Jet::constant(0.0, r0[0].base(), r0[0].order());
  for (int j = 0; j < 4; ++j) {
    std::array<Jet, 3> m1{}, m2{}, m3{};
    int cc = 0;
    for (int k = 0; k < 4; ++k) {
      if (k == j) continue;
      m1[cc] = r1[k];
      m2[cc] = r2[k];
      m3[cc] = r3[k];
      ++cc;
    }
    const Jet minor = det3_jet(m1, m2, m3);
    const Jet term = r0[j] * minor;
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

/// Null-frame data shared by the light-cone machinery. The canonical null
/// directrix is nu(s) = (1, cos u, sin u, 0), u = integral sqrt(a), which has
/// <nu', nu'> = a and nu0 + nu3 == 1.
struct NullFrame {
  AnalyticMap a, d, u;
  double branch_sign = 1.0;  // sign of the F3 component at the base point

  Vec4J nu_jets(complex z, int n) const {
    const Jet ju = u.jet(z, n);
    return {Jet::constant(1.0, z, n), jet_cos(ju), jet_sin(ju),
            Jet::constant(0.0, z, n)};
  }

  /// Reflected companion (1, -cos u, -sin u, 0) of the canonical directrix.
  Vec4J nbar_jets(complex z, int n) const {
    const Jet ju = u.jet(z, n);
    return {Jet::constant(1.0, z, n), -jet_cos(ju), -jet_sin(ju),
            Jet::constant(0.0, z, n)};
  }

  /// Boundary Gauss map of the directrix: G = (nu1 - i nu2)/(nu0 + nu3).
  Jet G_jet(complex z, int n) const {
    const Vec4J nu = nu_jets(z, n);
    return jet_div(nu[1] - complex(0.0, 1.0) * nu[2], nu[0] + nu[3]);
  }

  /// L = -(nu0 + nu3) (d/(2a) + Im(G''/G')), analytically extended: the
  /// imaginary part is realized as (h - h*)/(2i) of h = G''/G'.
  Jet L_jet(complex z, int n) const {
    const Jet ja = a.jet(z, n);
    const Jet jd = d.jet(z, n);
    const Jet h = im_h_jet(z, n);
    const Vec4J nu = nu_jets(z, n);
    return (-(nu[0] + nu[3]) * (0.5 * jet_div(jd, ja) + h)).truncated(n);
  }

  Jet im_h_jet(complex z, int n) const {
    const Jet g = G_jet(z, n + 2);
    const Jet g1 = g.derivative_jet();
    const Jet g2 = g1.derivative_jet();
    const Jet h = jet_div(g2, g1).truncated(n);
    const Jet hs = conj_reflect(h, z, n);
    return ((h - hs) * complex(0.0, -0.5)).truncated(n);
  }

  /// F = A nu + D e3 solving <F,nu> = <F,nu'> = 0, <F,F> = a, F0+F3 = L:
  /// D = branch_sign * sqrt(a), A = (L - D)/(nu0 + nu3).
  Vec4J F_jets(complex z, int n) const {
    const Jet ja = a.jet(z, n);
    const Jet jl = L_jet(z, n);
    const Jet jd = jet_sqrt(ja) * complex(branch_sign);
    const Vec4J nu = nu_jets(z, n);
    const Jet A = jet_div(jl - jd, nu[0] + nu[3]);
    return {A * nu[0], A * nu[1], A * nu[2], A * nu[3] + jd};
  }

  /// alpha recovered from  alpha x nu x nu' = F, <alpha, nu'> = 0 and
  /// <alpha, alpha> = 0 in the frame (nu, nbar, nu'/u', e3).
  Vec4J alpha_jets(complex z, int n) const {
    const Jet ja = a.jet(z, n);
    const Jet jl = L_jet(z, n);
    const Jet jw = jet_sqrt(ja);
    const Jet jd = jw * complex(branch_sign);
    const Vec4J nu = nu_jets(z, n);
    const Vec4J nb = nbar_jets(z, n);
    const Jet A = jet_div(jl - jd, nu[0] + nu[3]);
    const Jet Q = 0.5 * jet_div(jd, jw);       // D / (2 u')
    const Jet S = jet_div(A, jw);              // A / u'
    const Jet P = 0.25 * jet_div(S * S, Q);    // null normalization
    Vec4J out{};
    for (int k = 0; k < 4; ++k) out[k] = (P * nu[k] + Q * nb[k]).truncated(n);
    out[3] = (out[3] + S).truncated(n);
    return out;
  }

 private:
  /// Jet of h*(z) = conj(h(conj z)) from the same closed-form pieces.
  Jet conj_reflect(const Jet&, complex z, int n) const {
    // Rebuild h at conj(z) and conjugate the coefficients.
    const Jet g = G_jet(std::conj(z), n + 2);
    const Jet g1 = g.derivative_jet();
    const Jet g2 = g1.derivative_jet();
    const Jet h = jet_div(g2, g1).truncated(n);
    Jet out(z, n);
    for (int k = 0; k <= n; ++k) out.at(k) = std::conj(h[k]);
    return out;
  }
};

}  // namespace detail

/// Light-cone solution bundle: the assembled field plus the frame data the
/// resolution runs through (directrix nu, companion F, null curve alpha, the
/// boundary Gauss map G and the Schwarzian right-hand side U).
struct LightconeSolution {
  LiouvilleSolution solution;
  AnalyticMap G;          ///< boundary Gauss map of the directrix
  AnalyticMap U;          ///< Schwarzian right-hand side {g, z}
  FBranch branch = FBranch::upper;
  std::function<LVec4(double)> nu;     ///< directrix at real s
  std::function<LVec4(double)> F;      ///< null companion at real s
  std::function<LVec4(double)> alpha;  ///< recovered null curve at real s
};

/// Solve the c = 1 Cauchy problem through the light-cone resolution: build
/// the canonical directrix, the null companion F on the selected branch, the
/// recovered curve alpha, and the Schwarzian
///   {g, z} = {G, z} + a/2 + <alpha', nu'> - i det(nu, alpha, nu', alpha'),
/// then solve for g with the canonical initial jet and assemble the field.
inline LightconeSolution solve_cauchy_lightcone(
    const AnalyticMap& a, const AnalyticMap& d, double s_min, double s_max,
    FBranch branch = FBranch::upper, const Tolerances& tol = default_tol()) {
  LiouvilleCauchyData data =
      LiouvilleCauchyData::from_slope(a, d, 1.0, s_min, s_max);
  const double s0 = data.s0();

  detail::NullFrame frame;
  frame.a = data.a();
  frame.d = data.d();
  frame.u = map_integral(map_sqrt(data.a()), s0, 0.0, tol);
  frame.branch_sign = (branch == FBranch::upper) ? 1.0 : -1.0;

  // Branch continuity scan: the two candidates D = +-sqrt(a) must stay
  // separated; an ambiguous continuation is an error, never a silent switch.
  {
    const int n_scan = 512;
    double prev = frame.branch_sign *
                  std::sqrt(data.a().value(s0).real());
    for (int i = 0; i <= n_scan; ++i) {
      const double s = s_min + (s_max - s_min) * i / double(n_scan);
      const double root = std::sqrt(data.a().value(s).real());
      const double d_up = std::abs(root - prev);
      const double d_dn = std::abs(-root - prev);
      const double chosen = std::min(d_up, d_dn);
      const double other = std::max(d_up, d_dn);
      if (!(other > 2.0 * chosen))
        throw BranchJump(
            "solve_cauchy_lightcone: null companion branches collide on the "
            "interval");
      prev = (d_up <= d_dn) ? root : -root;
    }
  }

  // Schwarzian right-hand side from the frame data.
  AnalyticMap U(
      [frame](complex z, int n) {
        const int m = n + 1;
        const detail::Vec4J nu = frame.nu_jets(z, m);
        const detail::Vec4J al = frame.alpha_jets(z, m);
        detail::Vec4J nup{}, alp{};
        for (int k = 0; k < 4; ++k) {
          nup[k] = nu[k].derivative_jet();
          alp[k] = al[k].derivative_jet();
        }
        const Jet q1 = detail::inner4_jet(alp, nup);
        const Jet q2 = detail::det4_jet(nu, al, nup, alp);
        // {G, z} assembled from the same directrix jets.
        const Jet g = frame.G_jet(z, n + 3);
        const Jet g1 = g.derivative_jet();
        const Jet g2 = g1.derivative_jet();
        const Jet r = jet_div(g2, g1);
        const Jet sg = (r.derivative_jet() - 0.5 * r * r).truncated(n);
        const Jet ja = frame.a.jet(z, n);
        return (sg + 0.5 * ja + q1 - complex(0.0, 1.0) * q2).truncated(n);
      },
      {}, false);

  const SchwarzianInit init = detail::canonical_init(data);
  ProjectivePair pair = solve_schwarzian(U, s0, init, tol);
  const AnalyticMap roa = map_div(data.b(), data.a());
  auto eval = detail::projective_extension(pair, data.a(), roa, init.g1);
  AnalyticMap g = pair.as_map();

  LightconeSolution out{
      LiouvilleSolution(std::move(eval), data, "lightcone", std::move(g),
                        std::move(pair)),
      AnalyticMap([frame](complex z, int n) { return frame.G_jet(z, n); }, {},
                  false),
      U, branch, nullptr, nullptr, nullptr};
  out.nu = [frame](double s) {
    const detail::Vec4J j = frame.nu_jets(complex(s), 0);
    return LVec4{j[0].value().real(), j[1].value().real(),
                 j[2].value().real(), j[3].value().real()};
  };
  out.F = [frame](double s) {
    const detail::Vec4J j = frame.F_jets(complex(s), 0);
    return LVec4{j[0].value().real(), j[1].value().real(),
                 j[2].value().real(), j[3].value().real()};
  };
  out.alpha = [frame](double s) {
    const detail::Vec4J j = frame.alpha_jets(complex(s), 0);
    return LVec4{j[0].value().real(), j[1].value().real(),
                 j[2].value().real(), j[3].value().real()};
  };
  return out;
}

/// Integrate the Frenet system of a unit-speed sphere curve with curvature
/// kappa through the light-cone Schwarzian: run the resolution with a == 1,
/// d = -2 kappa, develop g, and invert the stereographic projection. The
/// inverse image is assembled from the homogeneous pair, so crossing the
/// projection pole is harmless.
inline SpaceFormCurve sphere_frenet_via_schwarzian(
    const AnalyticMap& kappa, double s_min, double s_max,
    const Tolerances& tol = default_tol()) {
  const AnalyticMap a = map_constant(1.0);
  const AnalyticMap d = map_scale(-2.0, kappa);
  LightconeSolution lc = solve_cauchy_lightcone(a, d, s_min, s_max,
                                                FBranch::upper, tol);
  const ProjectivePair pair = *lc.solution.projective_pair();
  const AnalyticMap y1 = pair.y1().as_map();
  const AnalyticMap y2 = pair.y2().as_map();
  const AnalyticMap y1c = map_conj(y1);
  const AnalyticMap y2c = map_conj(y2);
  const double s0 = 0.5 * (s_min + s_max);
  auto eval = [y1, y2, y1c, y2c](complex z, int order) {
    const Jet a1 = y1.jet(z, order), a2 = y2.jet(z, order);
    const Jet b1 = y1c.jet(z, order), b2 = y2c.jet(z, order);
    const Jet n11 = a1 * b1, n22 = a2 * b2;
    const Jet den = n11 + n22;
    const Jet x0 = jet_div(n11 - n22, den);
    const Jet x1 = jet_div(a1 * b2 + b1 * a2, den);
    const Jet x2 = jet_div(a1 * b2 - b1 * a2, den) * complex(0.0, -1.0);
    return std::array<Jet, 3>{x0, x1, x2};
  };
  AnalyticMap u(
      [s0](complex z, int n) {
        Jet j = Jet::variable(z, n);
        return j - complex(s0);
      },
      {}, true);
  return SpaceFormCurve(1.0, u, kappa, s0, std::move(eval));
}

// ---------------------------------------------------------------------------
// Rotation alignment (Procrustes) for congruence-only comparisons.
// ---------------------------------------------------------------------------

namespace detail {

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.
inline void jacobi_eigen3(std::array<std::array<double, 3>, 3> m,
                          std::array<double, 3>& eig,
                          std::array<std::array<double, 3>, 3>& vec) {
  vec = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(m[0][1]) + std::abs(m[0][2]) + std::abs(m[1][2]);
    if (off < 1e-15) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(m[p][q]) < 1e-18) continue;
        const double theta = 0.5 * std::atan2(2.0 * m[p][q], m[q][q] - m[p][p]);
        const double cth = std::cos(theta), sth = std::sin(theta);
        for (int k = 0; k < 3; ++k) {
          const double mkp = m[k][p], mkq = m[k][q];
          m[k][p] = cth * mkp - sth * mkq;
          m[k][q] = sth * mkp + cth * mkq;
        }
        for (int k = 0; k < 3; ++k) {
          const double mpk = m[p][k], mqk = m[q][k];
          m[p][k] = cth * mpk - sth * mqk;
          m[q][k] = sth * mpk + cth * mqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = vec[k][p], vkq = vec[k][q];
          vec[k][p] = cth * vkp - sth * vkq;
          vec[k][q] = sth * vkp + cth * vkq;
        }
      }
    }
  }
  for (int k = 0; k < 3; ++k) eig[k] = m[k][k];
}

}  // namespace detail

/// Least-squares rotation R in SO(3) minimizing sum |R from_i - to_i|^2
/// (origin-anchored; suitable for sphere curves and frames). Throws
/// DegenerateData when the correlation is rank-deficient or orientation-
/// reversing.
inline std::array<std::array<double, 3>, 3> procrustes_rotation(
    const std::vector<std::array<double, 3>>& from,
    const std::vector<std::array<double, 3>>& to) {
  if (from.size() != to.size() || from.size() < 3)
    throw InvalidArgument("procrustes_rotation: need matched samples (>= 3)");
  std::array<std::array<double, 3>, 3> h{};
  for (size_t i = 0; i < from.size(); ++i)
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) h[r][col] += to[i][r] * from[i][col];
  // R = H (H^T H)^{-1/2}.
  std::array<std::array<double, 3>, 3> hth{};
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col)
      for (int k = 0; k < 3; ++k) hth[r][col] += h[k][r] * h[k][col];
  std::array<double, 3> eig{};
  std::array<std::array<double, 3>, 3> v{};
  detail::jacobi_eigen3(hth, eig, v);
  const double det_h = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
                       h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
                       h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
  for (int k = 0; k < 3; ++k)
    if (!(eig[k] > 1e-18))
      throw DegenerateData("procrustes_rotation: rank-deficient correlation");
  if (!(det_h > 0.0))
    throw DegenerateData(
        "procrustes_rotation: orientation-reversing correlation");
  std::array<std::array<double, 3>, 3> inv_sqrt{};
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col)
      for (int k = 0; k < 3; ++k)
        inv_sqrt[r][col] += v[r][k] * v[col][k] / std::sqrt(eig[k]);
  std::array<std::array<double, 3>, 3> rot{};
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col)
      for (int k = 0; k < 3; ++k) rot[r][col] += h[r][k] * inv_sqrt[k][col];
  return rot;
}

/// max_i |R from_i - to_i| for a candidate alignment.
inline double procrustes_residual(
    const std::array<std::array<double, 3>, 3>& rot,
    const std::vector<std::array<double, 3>>& from,
    const std::vector<std::array<double, 3>>& to) {
  double worst = 0.0;
  for (size_t i = 0; i < from.size(); ++i) {
    double n2 = 0.0;
    for (int r = 0; r < 3; ++r) {
      double x = -to[i][r];
      for (int k = 0; k < 3; ++k) x += rot[r][k] * from[i][k];
      n2 += x * x;
    }
    worst = std::max(worst, std::sqrt(n2));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Holonomy of closed curves on the unit sphere.
// ---------------------------------------------------------------------------

/// Result of transporting the adapted frame (alpha, t, alpha x t) of a
/// closed sphere curve over one period.
struct HolonomyResult {
  std::array<std::array<double, 3>, 3> rotation{};  ///< frame-match rotation
  double theta = 0.0;       ///< rotation angle in [0, 2 pi)
  bool closes = false;      ///< theta / (2 pi) rational within tolerance
  int folds = 0;            ///< denominator q when closes
  std::string verdict;      ///< human-readable closure verdict
  double orthogonality_error = 0.0;  ///< max |A^T A - I| entry and |det - 1|
};

/// Transport the Frenet frame of the unit-sphere curve with speed u'(s) and
/// geodesic curvature kappa(s) (both T-periodic) over one period and extract
/// the holonomy rotation, its angle, and a rationality verdict obtained from
/// continued-fraction convergents of theta/(2 pi) with denominators <= q_max.
inline HolonomyResult holonomy_S2(
    const AnalyticMap& uprime, const AnalyticMap& kappa, double T,
    const std::array<std::array<double, 3>, 3>& frame0 =
        {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
    int q_max = 64, double rational_tol = 1e-6,
    const Tolerances& tol = default_tol()) {
  if (!(T > 0.0)) throw InvalidArgument("holonomy_S2: period must be positive");
  // Periodicity and positivity preconditions, checked at samples.
  for (int i = 0; i < 32; ++i) {
    const double s = T * i / 32.0;
    const complex w0 = uprime.value(s), w1 = uprime.value(s + T);
    const complex k0 = kappa.value(s), k1 = kappa.value(s + T);
    const double sw = 1.0 + std::abs(w0), sk = 1.0 + std::abs(k0);
    if (std::abs(w1 - w0) > 1e-8 * sw)
      throw InvalidArgument("holonomy_S2: u' is not T-periodic");
    if (std::abs(k1 - k0) > 1e-8 * sk)
      throw InvalidArgument("holonomy_S2: kappa is not T-periodic");
    if (!(w0.real() > 0.0) || std::abs(w0.imag()) > 1e-9 * sw)
      throw InvalidArgument("holonomy_S2: u' must be positive on [0, T]");
  }
  // Initial frame must be orthonormal and right-handed.
  auto dot3 = [](const std::array<double, 3>& x, const std::array<double, 3>& y) {
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
  };
  auto cross3d = [](const std::array<double, 3>& x,
                    const std::array<double, 3>& y) {
    return std::array<double, 3>{x[1] * y[2] - x[2] * y[1],
                                 x[2] * y[0] - x[0] * y[2],
                                 x[0] * y[1] - x[1] * y[0]};
  };
  {
    const auto& al = frame0[0];
    const auto& tv = frame0[1];
    const auto& bv = frame0[2];
    const auto bx = cross3d(al, tv);
    double worst = std::abs(dot3(al, al) - 1.0);
    worst = std::max(worst, std::abs(dot3(tv, tv) - 1.0));
    worst = std::max(worst, std::abs(dot3(al, tv)));
    for (int k = 0; k < 3; ++k)
      worst = std::max(worst, std::abs(bv[k] - bx[k]));
    if (worst > 1e-9)
      throw InvalidArgument(
          "holonomy_S2: initial frame must be orthonormal right-handed");
  }

  // Taylor transport of the nine frame components. With the normal
  // convention n = -(alpha x t), the system reads
  //   alpha' = u' t,  t' = -u' kappa b - u' alpha,  b' = u' kappa t.
  std::array<std::array<double, 3>, 3> st = frame0;  // rows: alpha, t, b
  {
    const int n = tol.ode_order;
    double sc = 0.0;
    int guard = 0;
    while (sc != T) {
      if (++guard > 100000)
        throw StepFailure("holonomy_S2: step count exploded");
      const Jet jp = uprime.jet(sc, n);
      const Jet jq = (jp * kappa.jet(sc, n)).truncated(n);
      // Coefficient tables for the 9 components.
      std::array<std::vector<complex>, 9> cf;
      for (auto& vrow : cf) vrow.assign(static_cast<size_t>(n) + 1, complex{});
      for (int r = 0; r < 3; ++r) {
        cf[r][0] = st[0][r];      // alpha
        cf[3 + r][0] = st[1][r];  // t
        cf[6 + r][0] = st[2][r];  // b
      }
      for (int k = 0; k + 1 <= n; ++k) {
        for (int r = 0; r < 3; ++r) {
          complex da{}, dt{}, db{};
          for (int j = 0; j <= k; ++j) {
            da += jp[j] * cf[3 + r][k - j];
            dt += -jq[j] * cf[6 + r][k - j] - jp[j] * cf[r][k - j];
            db += jq[j] * cf[3 + r][k - j];
          }
          cf[r][k + 1] = da / double(k + 1);
          cf[3 + r][k + 1] = dt / double(k + 1);
          cf[6 + r][k + 1] = db / double(k + 1);
        }
      }
      auto row_norm = [&](int k) {
        double m = 0.0;
        for (int i = 0; i < 9; ++i) m = std::max(m, std::abs(cf[i][k]));
        return m;
      };
      const double scale = std::max({row_norm(0), row_norm(1), 1e-300});
      double h = std::numeric_limits<double>::infinity();
      for (int k = n - 2; k <= n; ++k) {
        const double ck = row_norm(k);
        if (ck > 0.0)
          h = std::min(h, std::pow(tol.ode_step * scale / ck, 1.0 / double(k)));
      }
      h *= 0.9;
      const double dist = T - sc;
      double step;
      bool arrives = false;
      if (!(h < dist)) {
        step = dist;
        arrives = true;
      } else {
        if (h < 1e-13 * (1.0 + sc))
          throw StepFailure("holonomy_S2: Taylor radius collapsed");
        step = h;
      }
      for (int i = 0; i < 9; ++i) {
        complex acc = cf[i][n];
        for (int k = n - 1; k >= 0; --k) acc = acc * step + cf[i][k];
        st[i / 3][i % 3] = acc.real();
      }
      sc = arrives ? T : sc + step;
    }
  }

  // Frame-match rotation A = M(T) M(0)^T with frame vectors as columns.
  HolonomyResult out;
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += st[k][r] * frame0[k][col];
      out.rotation[r][col] = acc;
    }
  const auto& A = out.rotation;
  // Orthogonality diagnostic.
  {
    double worst = 0.0;
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) {
        double acc = 0.0;
        for (int k = 0; k < 3; ++k) acc += A[k][r] * A[k][col];
        worst = std::max(worst, std::abs(acc - (r == col ? 1.0 : 0.0)));
      }
    const double det = A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1]) -
                       A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0]) +
                       A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]);
    out.orthogonality_error = std::max(worst, std::abs(det - 1.0));
  }

  // Oriented rotation angle in [0, 2 pi): the axis is disambiguated by the
  // instantaneous rotation vector u'(0) (b(0) - kappa(0) alpha(0)).
  {
    const std::array<double, 3> w{0.5 * (A[2][1] - A[1][2]),
                                  0.5 * (A[0][2] - A[2][0]),
                                  0.5 * (A[1][0] - A[0][1])};
    const double wn = std::sqrt(dot3(w, w));
    const double tr = A[0][0] + A[1][1] + A[2][2];
    double theta = std::atan2(wn, 0.5 * (tr - 1.0));
    // Disambiguate the axis only when the rotation vector is above the
    // integration noise floor; near the identity both representatives of the
    // angle agree modulo 2 pi and the closure verdict is unaffected.
    if (wn > 1e-7) {
      const double k0 = kappa.value(0.0).real();
      std::array<double, 3> ref{};
      for (int k = 0; k < 3; ++k)
        ref[k] = frame0[2][k] - k0 * frame0[0][k];
      if (dot3(w, ref) < 0.0) theta = 2.0 * kPi - theta;
    }
    if (theta >= 2.0 * kPi) theta -= 2.0 * kPi;
    if (theta < 0.0) theta += 2.0 * kPi;
    out.theta = theta;
  }

  // Rationality verdict by continued-fraction convergents of theta/(2 pi).
  {
    const double x = out.theta / (2.0 * kPi);
    long best_q = -1;
    long p_prev = 0, q_prev = 1, p_cur = 1, q_cur = 0;  // convergents of x
    double frac = x;
    for (int iter = 0; iter < 64; ++iter) {
      const double fl = std::floor(frac);
      const long ai = static_cast<long>(fl);
      const long p_next = ai * p_cur + p_prev;
      const long q_next = ai * q_cur + q_prev;
      if (q_next > q_max || q_next <= 0) break;
      p_prev = p_cur;
      q_prev = q_cur;
      p_cur = p_next;
      q_cur = q_next;
      if (std::abs(x - double(p_cur) / double(q_cur)) <= rational_tol) {
        best_q = q_cur;
        break;
      }
      const double rem = frac - fl;
      if (rem < 1e-15) break;
      frac = 1.0 / rem;
    }
    // The p/q = 1/1 representative of an almost-full turn also closes.
    if (best_q < 0 && std::abs(x - 1.0) <= rational_tol) best_q = 1;
    if (best_q > 0) {
      out.closes = true;
      out.folds = static_cast<int>(best_q);
      out.verdict =
          "closed after " + std::to_string(out.folds) +
          (out.folds == 1 ? " period" : " periods");
    } else {
      out.closes = false;
      out.folds = 0;
      out.verdict = "no closure detected at this precision";
    }
  }
  return out;
}

}  // namespace cmc1
