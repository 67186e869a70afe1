#pragma once
/**
 * @file analytic.hpp
 * @brief AnalyticMap (jet-queryable analytic functions), Schwarzian
 *        derivatives, the prescribed-Schwarzian ODE solver, path integrals,
 *        grid continuation, and Moebius utilities.
 *
 * An AnalyticMap is an immutable, pure evaluator (z, order) -> Jet plus a
 * list of excluded points. Closed-form maps come from expression trees or
 * C++ lambdas; ODE-continued maps march a high-order Taylor scheme along
 * straight segments from their base point.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "cmc1/errors.hpp"
#include "cmc1/jet.hpp"
#include "cmc1/quadrature.hpp"
#include "cmc1/tolerances.hpp"

namespace cmc1 {

/// Axis-aligned rectangle [s_min, s_max] x [t_min, t_max] in z = s + it.
struct Rect {
  double s_min = 0.0, s_max = 0.0, t_min = 0.0, t_max = 0.0;
  bool contains(complex z, double pad = 0.0) const {
    return z.real() >= s_min - pad && z.real() <= s_max + pad &&
           z.imag() >= t_min - pad && z.imag() <= t_max + pad;
  }
};

class AnalyticMap {
 public:
  using Evaluator = std::function<Jet(complex, int)>;

  AnalyticMap() = default;
  explicit AnalyticMap(Evaluator ev, std::vector<complex> excluded = {},
                       bool real_on_axis = false)
      : ev_(std::make_shared<Evaluator>(std::move(ev))),
        excluded_(std::make_shared<std::vector<complex>>(std::move(excluded))),
        real_on_axis_(real_on_axis) {}

  bool valid() const { return static_cast<bool>(ev_); }

  /// Jet of the map at z to the requested order.
  Jet jet(complex z, int order) const {
    if (!ev_) throw InvalidArgument("AnalyticMap: empty evaluator");
    return (*ev_)(z, order);
  }

  complex value(complex z) const { return jet(z, 0).value(); }
  complex derivative(complex z, int k) const { return jet(z, k).derivative(k); }

  const std::vector<complex>& excluded() const {
    static const std::vector<complex> none;
    return excluded_ ? *excluded_ : none;
  }
  bool real_on_axis() const { return real_on_axis_; }

  AnalyticMap with_excluded(std::vector<complex> pts) const {
    AnalyticMap out = *this;
    out.excluded_ = std::make_shared<std::vector<complex>>(std::move(pts));
    return out;
  }
  AnalyticMap marked_real() const {
    AnalyticMap out = *this;
    out.real_on_axis_ = true;
    return out;
  }

  double distance_to_excluded(complex z) const {
    double d = std::numeric_limits<double>::infinity();
    for (const complex& p : excluded()) d = std::min(d, std::abs(z - p));
    return d;
  }

 private:
  std::shared_ptr<Evaluator> ev_;
  std::shared_ptr<std::vector<complex>> excluded_;
  bool real_on_axis_ = false;
};

// ---------------------------------------------------------------------------
// Constructors for common closed forms and combinators.
// ---------------------------------------------------------------------------

inline AnalyticMap map_constant(complex v) {
  return AnalyticMap(
      [v](complex z, int n) { return Jet::constant(v, z, n); }, {},
      std::abs(v.imag()) < 1e-15);
}

inline AnalyticMap map_identity() {
  return AnalyticMap([](complex z, int n) { return Jet::variable(z, n); }, {},
                     true);
}

/// Wrap a jet-level function f(jet of z) -> jet as an AnalyticMap.
inline AnalyticMap map_from_jet_fn(std::function<Jet(const Jet&)> f,
                                   std::vector<complex> excluded = {},
                                   bool real_on_axis = false) {
  return AnalyticMap(
      [f = std::move(f)](complex z, int n) {
        return f(Jet::variable(z, n));
      },
      std::move(excluded), real_on_axis);
}

inline AnalyticMap map_add(const AnalyticMap& a, const AnalyticMap& b) {
  std::vector<complex> ex = a.excluded();
  ex.insert(ex.end(), b.excluded().begin(), b.excluded().end());
  return AnalyticMap(
      [a, b](complex z, int n) { return a.jet(z, n) + b.jet(z, n); },
      std::move(ex), a.real_on_axis() && b.real_on_axis());
}

inline AnalyticMap map_sub(const AnalyticMap& a, const AnalyticMap& b) {
  std::vector<complex> ex = a.excluded();
  ex.insert(ex.end(), b.excluded().begin(), b.excluded().end());
  return AnalyticMap(
      [a, b](complex z, int n) { return a.jet(z, n) - b.jet(z, n); },
      std::move(ex), a.real_on_axis() && b.real_on_axis());
}

inline AnalyticMap map_mul(const AnalyticMap& a, const AnalyticMap& b) {
  std::vector<complex> ex = a.excluded();
  ex.insert(ex.end(), b.excluded().begin(), b.excluded().end());
  return AnalyticMap(
      [a, b](complex z, int n) { return a.jet(z, n) * b.jet(z, n); },
      std::move(ex), a.real_on_axis() && b.real_on_axis());
}

inline AnalyticMap map_div(const AnalyticMap& a, const AnalyticMap& b) {
  std::vector<complex> ex = a.excluded();
  ex.insert(ex.end(), b.excluded().begin(), b.excluded().end());
  return AnalyticMap(
      [a, b](complex z, int n) { return jet_div(a.jet(z, n), b.jet(z, n)); },
      std::move(ex), a.real_on_axis() && b.real_on_axis());
}

inline AnalyticMap map_scale(complex s, const AnalyticMap& a) {
  return AnalyticMap([s, a](complex z, int n) { return s * a.jet(z, n); },
                     a.excluded(),
                     a.real_on_axis() && std::abs(s.imag()) < 1e-15);
}

/// d/dz of a map (queries one extra order).
inline AnalyticMap map_derivative(const AnalyticMap& a) {
  return AnalyticMap(
      [a](complex z, int n) { return a.jet(z, n + 1).derivative_jet(); },
      a.excluded(), a.real_on_axis());
}

/// The conjugate function f*(z) = conj(f(conj z)); on the real axis this is
/// the complex conjugate of f. Holomorphic whenever f is.
inline AnalyticMap map_conj(const AnalyticMap& a) {
  std::vector<complex> ex;
  for (complex p : a.excluded()) ex.push_back(std::conj(p));
  return AnalyticMap(
      [a](complex z, int n) {
        const Jet j = a.jet(std::conj(z), n);
        std::vector<complex> c(j.coeffs().size());
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::conj(j[k]);
        return Jet(z, std::move(c));
      },
      std::move(ex), a.real_on_axis());
}

/// Composition a(b(z)). The outer jet is re-expanded through the inner one.
inline AnalyticMap map_compose(const AnalyticMap& outer,
                               const AnalyticMap& inner) {
  return AnalyticMap(
      [outer, inner](complex z, int n) {
        const Jet bi = inner.jet(z, n);
        const Jet ao = outer.jet(bi.value(), n);
        // Horner composition of ao with (bi - bi(0)).
        Jet dz = bi;
        dz.at(0) = 0.0;
        Jet acc = Jet::constant(ao[ao.order()], z, n);
        for (int k = ao.order() - 1; k >= 0; --k)
          acc = acc * dz + Jet::constant(ao[k], z, n);
        return acc;
      },
      {}, false);
}

// ---------------------------------------------------------------------------
// Schwarzian derivative.
// ---------------------------------------------------------------------------

/// {f, z} = (f''/f')' - (1/2)(f''/f')^2 from an order-3 jet.
inline complex schwarzian(const AnalyticMap& f, complex z) {
  const Jet j = f.jet(z, 3);
  const complex f1 = j.derivative(1), f2 = j.derivative(2),
                f3 = j.derivative(3);
  if (std::abs(f1) < 1e-13 * (std::abs(f2) + std::abs(f3) + 1.0))
    throw PoleSignal("schwarzian: f'(z) = 0");
  const complex r = f2 / f1;
  return f3 / f1 - 1.5 * r * r;
}

/// Schwarzian as a jet at z (for assembling right-hand sides analytically).
inline Jet schwarzian_jet(const AnalyticMap& f, complex z, int order) {
  const Jet j = f.jet(z, order + 3);
  const Jet f1 = j.derivative_jet();
  const Jet f2 = f1.derivative_jet();
  const Jet r = jet_div(f2, f1);
  return (r.derivative_jet() - 0.5 * r * r).truncated(order);
}

// ---------------------------------------------------------------------------
// Taylor-series continuation of the linear ODE y'' + (U/2) y = 0.
// ---------------------------------------------------------------------------

namespace detail {

/// Taylor coefficients of the solution with y(z0)=y0, y'(z0)=y1 where the
/// coefficient function U is supplied as a jet at z0 (order >= n-2).
inline std::vector<complex> ode_coeffs(const Jet& u, complex y0, complex y1,
                                       int n) {
  std::vector<complex> y(n + 1);
  y[0] = y0;
  if (n >= 1) y[1] = y1;
  for (int k = 0; k + 2 <= n; ++k) {
    complex acc{};
    for (int j = 0; j <= k; ++j) acc += u[j] * y[k - j];
    y[k + 2] = -0.5 * acc / double((k + 1) * (k + 2));
  }
  return y;
}

}  // namespace detail

/// One basis solution of y'' + (U/2)y = 0, continued by adaptive Taylor
/// steps along straight segments from the base point. Pure: every query
/// re-marches from (z0, state0), so results are reproducible bit-for-bit.
class OdeSolution {
 public:
  OdeSolution() = default;
  OdeSolution(AnalyticMap u, complex z0, complex y0, complex y1,
              Tolerances tol = default_tol())
      : u_(std::move(u)), z0_(z0), y0_(y0), y1_(y1), tol_(tol) {}

  complex base() const { return z0_; }

  /// Jet of y at z (marches z0 -> z on the straight segment).
  Jet jet(complex z, int order) const {
    complex zc = z0_, y = y0_, yp = y1_;
    march(zc, y, yp, z);
    const Jet u = u_.jet(z, std::max(order - 2, tol_.ode_order));
    std::vector<complex> c = detail::ode_coeffs(u, y, yp, order);
    return Jet(z, std::move(c));
  }

  AnalyticMap as_map() const {
    OdeSolution self = *this;
    return AnalyticMap(
        [self](complex z, int n) { return self.jet(z, n); }, {}, false);
  }

 private:
  /// Advance state (zc, y, yp) to z_target along the straight segment.
  void march(complex& zc, complex& y, complex& yp, complex z_target) const {
    const int n = tol_.ode_order;
    int guard = 0;
    while (zc != z_target) {
      if (++guard > 100000)
        throw StepFailure("OdeSolution: step count exploded on path");
      const complex dir = z_target - zc;
      const double dist = std::abs(dir);
      const Jet u = u_.jet(zc, n);
      std::vector<complex> c = detail::ode_coeffs(u, y, yp, n);
      // Trust radius: the last retained terms must stay below the relative
      // target, |c_k| h^k <= ode_step * scale for k near n.
      const double scale =
          std::max({std::abs(c[0]), std::abs(c[1]), 1e-300});
      double h = std::numeric_limits<double>::infinity();
      for (int k = n - 2; k <= n; ++k) {
        const double ck = std::abs(c[k]);
        if (ck > 0.0) {
          const double hk =
              std::pow(tol_.ode_step * scale / ck, 1.0 / double(k));
          h = std::min(h, hk);
        }
      }
      h *= 0.9;
      complex step;
      bool arrives = false;
      if (!(h < dist)) {
        step = dir;  // the trust radius covers the remainder: land exactly
        arrives = true;
      } else {
        if (h < 1e-13 * (1.0 + std::abs(zc)))
          throw StepFailure(
              "OdeSolution: Taylor radius collapsed (coefficient singularity "
              "on the path)");
        step = dir / dist * h;
      }
      // Horner evaluation of y and y' at the step.
      complex acc = c[n];
      complex accp = c[n] * double(n);
      for (int k = n - 1; k >= 1; --k) {
        acc = acc * step + c[k];
        accp = accp * step + c[k] * double(k);
      }
      acc = acc * step + c[0];
      y = acc;
      yp = accp;
      zc = arrives ? z_target : zc + step;
    }
  }

  AnalyticMap u_;
  complex z0_{}, y0_{}, y1_{};
  Tolerances tol_{};
};

// ---------------------------------------------------------------------------
// ProjectivePair: pole-safe representation of g = y1/y2.
// ---------------------------------------------------------------------------

class ProjectivePair {
 public:
  ProjectivePair() = default;
  ProjectivePair(OdeSolution y1, OdeSolution y2, complex wronskian)
      : y1_(std::move(y1)), y2_(std::move(y2)), w_(wronskian) {}

  const OdeSolution& y1() const { return y1_; }
  const OdeSolution& y2() const { return y2_; }

  /// Constant Wronskian y1' y2 - y1 y2' fixed at construction.
  complex wronskian() const { return w_; }

  /// Jet of g = y1/y2 at z; PoleSignal at poles (zeros of y2).
  Jet jet(complex z, int order) const {
    return jet_div(y1_.jet(z, order), y2_.jet(z, order));
  }
  complex value(complex z) const { return jet(z, 0).value(); }

  /// Jets of the two homogeneous components (always finite).
  std::pair<Jet, Jet> pair_jet(complex z, int order) const {
    return {y1_.jet(z, order), y2_.jet(z, order)};
  }

  /// Wronskian measured from jets at z (for the constancy invariant).
  complex wronskian_at(complex z) const {
    const Jet a = y1_.jet(z, 1), b = y2_.jet(z, 1);
    return a.derivative(1) * b.value() - a.value() * b.derivative(1);
  }

  AnalyticMap as_map() const {
    ProjectivePair self = *this;
    return AnalyticMap(
        [self](complex z, int n) { return self.jet(z, n); }, {}, false);
  }

 private:
  OdeSolution y1_, y2_;
  complex w_{};
};

/// Initial data for the Schwarzian solver: the 2-jet of g at z0.
struct SchwarzianInit {
  complex g0{0.0};
  complex g1{1.0};
  complex g2{0.0};
};

/// Solve {g, z} = U with g(z0), g'(z0), g''(z0) prescribed (default
/// normalization g(z0)=0, g'(z0)=1, g''(z0)=0). Returns the projective
/// pair y1/y2 with y'' + (U/2) y = 0 and Wronskian g'(z0).
inline ProjectivePair solve_schwarzian(const AnalyticMap& u, complex z0,
                                       const SchwarzianInit& init = {},
                                       const Tolerances& tol = default_tol()) {
  if (std::abs(init.g1) == 0.0)
    throw InvalidArgument("solve_schwarzian: init requires g'(z0) != 0");
  // y2(z0) = 1, y2'(z0) = -g''/(2g'), y1 = g*y2 at z0, y1' = g' + g*y2'.
  const complex gamma = -init.g2 / (2.0 * init.g1);
  OdeSolution y1(u, z0, init.g0, init.g1 + init.g0 * gamma, tol);
  OdeSolution y2(u, z0, complex(1.0), gamma, tol);
  return ProjectivePair(std::move(y1), std::move(y2), init.g1);
}

// ---------------------------------------------------------------------------
// Path integration and grid continuation.
// ---------------------------------------------------------------------------

/// Integral of f along the straight segment; rejects paths through an
/// excluded point of f.
inline complex path_integral(const AnalyticMap& f, complex z_from, complex z_to,
                             const Tolerances& tol = default_tol()) {
  const complex d = z_to - z_from;
  const double len = std::abs(d);
  for (const complex& p : f.excluded()) {
    // Distance from p to the segment.
    double dist;
    if (len == 0.0) {
      dist = std::abs(p - z_from);
    } else {
      double t = ((p - z_from) / d).real();
      t = std::clamp(t, 0.0, 1.0);
      dist = std::abs(p - (z_from + t * d));
    }
    if (dist < tol.mask_radius)
      throw ExcludedPointOnPath("path_integral: segment passes an excluded point");
  }
  return segment_integral([&](complex z) { return f.value(z); }, z_from, z_to,
                          tol.quadrature);
}

/// Antiderivative map F(z) = c0 + int_{z0}^{z} f, evaluated jet-wise: the
/// value comes from quadrature along z0 -> z, higher coefficients from the
/// integrand's jet. (Straight segments only, per the continuation policy.)
inline AnalyticMap map_integral(const AnalyticMap& f, complex z0, complex c0,
                                const Tolerances& tol = default_tol()) {
  return AnalyticMap(
      [f, z0, c0, tol](complex z, int n) {
        const complex val = c0 + path_integral(f, z0, z, tol);
        Jet j = f.jet(z, std::max(0, n - 1)).antiderivative_jet().truncated(n);
        j.at(0) = val;
        return j;
      },
      f.excluded(), false);
}

/// One evaluated grid node.
struct GridCell {
  complex value{};
  bool masked = false;
};

struct Grid {
  Rect rect;
  int ns = 0, nt = 0;
  std::vector<GridCell> cells;  // row-major by t-rows: index = it*ns + is
  GridCell& at(int is, int it) { return cells[size_t(it) * ns + is]; }
  const GridCell& at(int is, int it) const {
    return cells[size_t(it) * ns + is];
  }
  double s(int is) const {
    return ns == 1 ? rect.s_min
                   : rect.s_min + (rect.s_max - rect.s_min) * is / (ns - 1);
  }
  double t(int it) const {
    return nt == 1 ? rect.t_min
                   : rect.t_min + (rect.t_max - rect.t_min) * it / (nt - 1);
  }
  int masked_count() const {
    int m = 0;
    for (const auto& c : cells) m += c.masked ? 1 : 0;
    return m;
  }
};

/// Evaluate f on a rectangle, column-by-column; nodes within mask_radius of
/// an excluded point are masked, never errors.
inline Grid continuation_grid(const AnalyticMap& f, const Rect& rect, int ns,
                              int nt, const Tolerances& tol = default_tol()) {
  Grid g;
  g.rect = rect;
  g.ns = ns;
  g.nt = nt;
  g.cells.assign(size_t(ns) * nt, GridCell{});
  for (int is = 0; is < ns; ++is) {
    const double s = g.s(is);
    for (int it = 0; it < nt; ++it) {
      const complex z(s, g.t(it));
      GridCell& cell = g.at(is, it);
      if (f.distance_to_excluded(z) < tol.mask_radius) {
        cell.masked = true;
        continue;
      }
      try {
        // Order-1 jets so an exact pole hit (where the value itself is a
        // huge-but-finite rounding artifact) still trips the pole detector.
        cell.value = f.jet(z, 1).value();
        if (!is_finite(cell.value)) cell.masked = true;
      } catch (const PoleSignal&) {
        cell.masked = true;
      } catch (const StepFailure&) {
        cell.masked = true;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Moebius transformations.
// ---------------------------------------------------------------------------

struct Mobius {
  complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

  complex apply(complex w) const { return (a * w + b) / (c * w + d); }
  Jet apply(const Jet& w) const {
    return jet_div(a * w + b, c * w + d);
  }
  complex det() const { return a * d - b * c; }

  /// Normalize to det = 1 (two choices; pick the one with Re(a)+Re(d) >= 0).
  Mobius normalized() const {
    const complex s = std::sqrt(det());
    Mobius m{a / s, b / s, c / s, d / s};
    if ((m.a + m.d).real() < 0.0) {
      m.a = -m.a; m.b = -m.b; m.c = -m.c; m.d = -m.d;
    }
    return m;
  }

  bool is_su2(double tol = 1e-8) const {
    const Mobius m = normalized();
    return std::abs(m.a - std::conj(m.d)) <= tol &&
           std::abs(m.b + std::conj(m.c)) <= tol;
  }
};

/// The Moebius map sending (w1,w2,w3) to (v1,v2,v3) (all finite, distinct):
/// composed from the two standard maps onto (0, 1, infinity).
inline Mobius mobius_from_three_points(complex w1, complex w2, complex w3,
                                       complex v1, complex v2, complex v3) {
  // m(w) = ((w - w1)(w2 - w3)) / ((w - w3)(w2 - w1)) sends w1,w2,w3 -> 0,1,inf.
  auto to01inf = [](complex p1, complex p2, complex p3) {
    return Mobius{p2 - p3, -p1 * (p2 - p3), p2 - p1, -p3 * (p2 - p1)};
  };
  const Mobius mw = to01inf(w1, w2, w3);
  const Mobius mv = to01inf(v1, v2, v3);
  // result = mv^{-1} o mw
  const Mobius inv{mv.d, -mv.b, -mv.c, mv.a};
  return Mobius{inv.a * mw.a + inv.b * mw.c, inv.a * mw.b + inv.b * mw.d,
                inv.c * mw.a + inv.d * mw.c, inv.c * mw.b + inv.d * mw.d};
}

}  // namespace cmc1
