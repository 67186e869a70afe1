#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmc1/exprlang.hpp"
#include "cmc1/liouville.hpp"

using namespace cmc1;

namespace {

AnalyticMap emap(const std::string& text) { return parse_map(text, "s"); }

double sech2(double t) { return 1.0 / std::pow(std::cosh(t), 2); }

/// Distance between angles modulo 2 pi.
double angular_gap(double x, double y) {
  double d = std::fmod(std::abs(x - y), 2.0 * kPi);
  return std::min(d, 2.0 * kPi - d);
}

/// Worst pointwise difference of two solutions on a grid.
double field_gap(const LiouvilleSolution& p, const LiouvilleSolution& q,
                 const Rect& r, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = r.s_min + (r.s_max - r.s_min) * i / double(n - 1);
      const double t = r.t_min + (r.t_max - r.t_min) * j / double(n - 1);
      worst = std::max(worst, std::abs(p.phi(s, t) - q.phi(s, t)));
    }
  return worst;
}

double field_error(const LiouvilleSolution& p,
                   const std::function<double(double, double)>& ref,
                   const Rect& r, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = r.s_min + (r.s_max - r.s_min) * i / double(n - 1);
      const double t = r.t_min + (r.t_max - r.t_min) * j / double(n - 1);
      worst = std::max(worst, std::abs(p.phi(s, t) - ref(s, t)));
    }
  return worst;
}

const Rect kStrip{-1.0, 1.0, -0.8, 0.8};

}  // namespace

// ---------------------------------------------------------------------------
// Cauchy data construction and validation.
// ---------------------------------------------------------------------------

TEST_CASE("cauchy data: slope and b forms are mutually inverse") {
  auto data = LiouvilleCauchyData::from_slope(emap("2 + sin(s)"),
                                              emap("cos(s)"), 1.0, -1.0, 1.0);
  // b = (a' - i d)/2.
  for (double s : {-0.7, 0.0, 0.4, 0.9}) {
    const complex b = data.b().value(s);
    const complex want = 0.5 * (std::cos(s) - complex(0, 1) * std::cos(s));
    CHECK(std::abs(b - want) < 1e-12);
    CHECK(std::abs(data.d().value(s) - std::cos(s)) < 1e-12);
  }
  // Round-trip through the b-form.
  auto data2 =
      LiouvilleCauchyData::from_b(data.a(), data.b(), 1.0, -1.0, 1.0);
  for (double s : {-0.7, 0.0, 0.4, 0.9})
    CHECK(std::abs(data2.d().value(s) - std::cos(s)) < 1e-10);
}

TEST_CASE("cauchy data: validation rejects bad data") {
  CHECK_THROWS_AS(LiouvilleCauchyData::from_slope(emap("sin(s)"),
                                                  map_constant(0.0), 1.0,
                                                  -1.0, 1.0),
                  DegenerateData);  // a changes sign
  CHECK_THROWS_AS(LiouvilleCauchyData::from_slope(
                      map_constant(complex(1.0, 0.5)), map_constant(0.0),
                      1.0, -1.0, 1.0),
                  InvalidArgument);  // a not real
  CHECK_THROWS_AS(LiouvilleCauchyData::from_slope(
                      map_constant(1.0), map_constant(complex(0.0, 1.0)),
                      1.0, -1.0, 1.0),
                  InvalidArgument);  // d not real
  CHECK_THROWS_AS(LiouvilleCauchyData::from_slope(map_constant(1.0),
                                                  map_constant(0.0), 1.0,
                                                  1.0, -1.0),
                  InvalidArgument);  // empty interval
  // b breaking 2 Re b = a'.
  CHECK_THROWS_AS(LiouvilleCauchyData::from_b(map_constant(1.0),
                                              map_constant(1.0), 1.0, -1.0,
                                              1.0),
                  InvalidArgument);
}

// ---------------------------------------------------------------------------
// Closed-form strips.
// ---------------------------------------------------------------------------

TEST_CASE("model strip: a=1, d=0, c=1 gives sech^2 t on every route") {
  auto data = LiouvilleCauchyData::from_slope(map_constant(1.0),
                                              map_constant(0.0), 1.0, -1.0,
                                              1.0);
  auto ref = [](double, double t) { return sech2(t); };
  auto sol_a = solve_cauchy_analytic(data);
  auto sol_g = solve_cauchy_geometric(data);
  auto sol_e = solve_cauchy_geodesic(map_constant(1.0), -1.0, 1.0);
  CHECK(field_error(sol_a, ref, kStrip, 9) < 1e-9);
  CHECK(field_error(sol_g, ref, kStrip, 9) < 1e-8);
  CHECK(field_error(sol_e, ref, kStrip, 9) < 1e-9);
  CHECK(sol_a.max_boundary_value_error(101) < 1e-10);
  CHECK(sol_a.max_boundary_slope_error(101) < 1e-8);
  CHECK(sol_a.max_interior_residual(Rect{-0.5, 0.5, -0.3, 0.3}, 5, 5) < 1e-6);
  CHECK(sol_a.provenance() == "analytic");
  CHECK(sol_g.provenance() == "geometric");
  CHECK(sol_e.provenance() == "geodesic");
  // Hermitian symmetry: the extension is real on the diagonal.
  CHECK(sol_a.hermitian_defect(0.3, 0.5) < 1e-12);
}

TEST_CASE("closed forms: a=4 gives 4 sech^2(2t); c=-1 gives sec^2 t") {
  auto data4 = LiouvilleCauchyData::from_slope(map_constant(4.0),
                                               map_constant(0.0), 1.0, -1.0,
                                               1.0);
  auto sol4 = solve_cauchy_analytic(data4);
  auto ref4 = [](double, double t) {
    return 4.0 / std::pow(std::cosh(2.0 * t), 2);
  };
  CHECK(field_error(sol4, ref4, kStrip, 9) < 1e-9);

  auto datam = LiouvilleCauchyData::from_slope(map_constant(1.0),
                                               map_constant(0.0), -1.0, -1.0,
                                               1.0);
  auto solm_a = solve_cauchy_analytic(datam);
  auto solm_g = solve_cauchy_geometric(datam);
  auto refm = [](double, double t) { return 1.0 / std::pow(std::cos(t), 2); };
  const Rect narrow{-1.0, 1.0, -0.7, 0.7};  // stay away from the t=pi/2 pole
  CHECK(field_error(solm_a, refm, narrow, 9) < 1e-9);
  CHECK(field_error(solm_g, refm, narrow, 9) < 1e-8);
}

TEST_CASE("geodesic route: developing map and flat slope") {
  auto sol1 = solve_cauchy_geodesic(map_constant(1.0), -1.0, 1.0);
  const AnalyticMap& g = sol1.developing_map();
  for (complex z : {complex(0.2, 0.1), complex(-0.5, 0.3), complex(0.0, 0.0)})
    CHECK(std::abs(g.value(z) - std::exp(complex(0, 1) * z)) < 1e-12);

  auto solv = solve_cauchy_geodesic(emap("2 + sin(s)"), -1.0, 1.0);
  CHECK(solv.max_boundary_slope_error(101) < 1e-8);
  CHECK(solv.max_boundary_value_error(101) < 1e-10);

  // Geodesic route equals the geometric route when d == 0 and c == 1.
  for (const char* ae : {"1", "4", "2 + sin(s)"}) {
    auto data = LiouvilleCauchyData::from_slope(emap(ae), map_constant(0.0),
                                                1.0, -1.0, 1.0);
    auto se = solve_cauchy_geodesic(emap(ae), -1.0, 1.0);
    auto sg = solve_cauchy_geometric(data);
    CHECK(field_gap(se, sg, kStrip, 7) < 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Oracle triangle: analytic / geometric / lightcone.
// ---------------------------------------------------------------------------

TEST_CASE("oracle triangle: all three c=1 routes agree on the battery") {
  const char* as[] = {"1", "4", "2 + sin(s)"};
  const char* ds[] = {"0", "0 - 2", "cos(s)"};
  for (const char* ae : as) {
    for (const char* de : ds) {
      CAPTURE(ae);
      CAPTURE(de);
      auto data =
          LiouvilleCauchyData::from_slope(emap(ae), emap(de), 1.0, -1.0, 1.0);
      auto sa = solve_cauchy_analytic(data);
      auto sg = solve_cauchy_geometric(data);
      auto lc = solve_cauchy_lightcone(emap(ae), emap(de), -1.0, 1.0);
      CHECK(field_gap(sa, sg, kStrip, 7) < 1e-7);
      CHECK(field_gap(sa, lc.solution, kStrip, 7) < 1e-7);
      CHECK(sg.max_boundary_value_error(101) < 1e-8);
      CHECK(sg.max_boundary_slope_error(101) < 1e-6);
      CHECK(sa.max_boundary_value_error(101) < 1e-8);
      CHECK(sa.max_boundary_slope_error(101) < 1e-6);
    }
  }
}

TEST_CASE("interior residual on the battery (analytic assembly)") {
  const char* as[] = {"1", "4", "2 + sin(s)"};
  const char* ds[] = {"0", "0 - 2", "cos(s)"};
  for (const char* ae : as)
    for (const char* de : ds) {
      CAPTURE(ae);
      CAPTURE(de);
      auto data =
          LiouvilleCauchyData::from_slope(emap(ae), emap(de), 1.0, -1.0, 1.0);
      auto sa = solve_cauchy_analytic(data);
      CHECK(sa.max_interior_residual(kStrip, 5, 5) < 1e-6);
    }
  // Spot-check the other assemblies on one non-trivial case.
  auto data = LiouvilleCauchyData::from_slope(emap("2 + sin(s)"),
                                              emap("cos(s)"), 1.0, -1.0, 1.0);
  CHECK(solve_cauchy_geometric(data).max_interior_residual(
            Rect{-0.5, 0.5, -0.4, 0.4}, 4, 4) < 1e-6);
  auto lc = solve_cauchy_lightcone(emap("2 + sin(s)"), emap("cos(s)"), -1.0,
                                   1.0);
  CHECK(lc.solution.max_interior_residual(Rect{-0.5, 0.5, -0.4, 0.4}, 4, 4) <
        1e-6);
}

TEST_CASE("negative curvature: geometric agrees with analytic") {
  auto data = LiouvilleCauchyData::from_slope(map_constant(1.0),
                                              emap("cos(s)"), -1.0, -1.0,
                                              1.0);
  auto sa = solve_cauchy_analytic(data);
  auto sg = solve_cauchy_geometric(data);
  CHECK(field_gap(sa, sg, Rect{-1.0, 1.0, -0.4, 0.4}, 7) < 1e-8);
  CHECK(sg.max_boundary_value_error(101) < 1e-8);
  CHECK(sg.max_boundary_slope_error(101) < 1e-6);

  auto data2 = LiouvilleCauchyData::from_slope(emap("2 + sin(s)"),
                                               emap("0 - 1"), -1.0, -1.0,
                                               1.0);
  CHECK(field_gap(solve_cauchy_analytic(data2), solve_cauchy_geometric(data2),
                  Rect{-1.0, 1.0, -0.4, 0.4}, 7) < 1e-8);
}

TEST_CASE("exponential data: two-route agreement for a = e^{2s}") {
  auto data = LiouvilleCauchyData::from_slope(emap("exp(2 * s)"),
                                              map_constant(0.0), 1.0, -1.0,
                                              1.0);
  auto sa = solve_cauchy_analytic(data);
  auto sg = solve_cauchy_geometric(data);
  CHECK(field_gap(sa, sg, Rect{-1.0, 1.0, -0.5, 0.5}, 7) < 1e-7);
}

// ---------------------------------------------------------------------------
// Degenerate route (c == 0).
// ---------------------------------------------------------------------------

TEST_CASE("degenerate: closed forms and harmonic residual") {
  auto s1 = solve_degenerate(map_constant(1.0), map_constant(0.0), -1.0, 1.0);
  CHECK(field_error(s1, [](double, double) { return 1.0; }, kStrip, 7) <
        1e-10);

  auto s2 = solve_degenerate(emap("exp(2 * s)"), map_constant(0.0), -1.0,
                             1.0);
  CHECK(field_error(s2, [](double s, double) { return std::exp(2.0 * s); },
                    kStrip, 7) < 1e-9);

  auto s3 = solve_degenerate(map_constant(1.0), map_constant(2.0), -1.0, 1.0);
  CHECK(field_error(s3, [](double, double t) { return std::exp(2.0 * t); },
                    kStrip, 7) < 1e-10);

  // log phi is harmonic: residual with c = 0 measures |Delta log phi|.
  CHECK(s2.max_interior_residual(Rect{-0.5, 0.5, -0.4, 0.4}, 5, 5) < 1e-8);
  CHECK(s3.max_interior_residual(Rect{-0.5, 0.5, -0.4, 0.4}, 5, 5) < 1e-8);

  // Structure: a holomorphic factor exists, a developing map does not.
  CHECK(s3.holomorphic_factor().valid());
  CHECK_THROWS_AS(s3.developing_map(), InvalidArgument);
  const complex f = s3.holomorphic_factor().value(complex(0.3, 0.2));
  CHECK(std::abs(std::abs(f) * std::abs(f) -
                 s3.phi(0.3, 0.2) * 1.0) < 1e-10);
}

TEST_CASE("degenerate: variable slope cross-check via boundary diagnostics") {
  auto sol = solve_degenerate(emap("2 + sin(s)"), emap("cos(s)"), -1.0, 1.0);
  CHECK(sol.max_boundary_value_error(101) < 1e-10);
  CHECK(sol.max_boundary_slope_error(101) < 1e-7);
  CHECK(sol.max_interior_residual(Rect{-0.5, 0.5, -0.4, 0.4}, 5, 5) < 1e-8);
}

// ---------------------------------------------------------------------------
// Modified equation.
// ---------------------------------------------------------------------------

TEST_CASE("modified: plain weight reduces to sech and meets its data") {
  auto m1 = solve_modified(map_constant(1.0), map_constant(0.0),
                           map_constant(1.0), -1.0, 1.0);
  double worst = 0.0;
  for (double s = -1.0; s <= 1.0; s += 0.5)
    for (double t = -0.8; t <= 0.8; t += 0.4)
      worst = std::max(worst,
                       std::abs(m1.rho(s, t) - 1.0 / std::cosh(t)));
  CHECK(worst < 1e-12);

  auto m2 = solve_modified(emap("2 + cos(s)"), emap("0 - sin(s) / 2"),
                           map_constant(1.0), -1.0, 1.0);
  CHECK(m2.max_boundary_error(101) < 1e-9);
  CHECK(m2.max_residual(Rect{-0.5, 0.5, -0.3, 0.3}, 5, 5) < 1e-6);

  // Inconsistent slope datum: Re w must equal v'/2.
  CHECK_THROWS_AS(solve_modified(map_constant(1.0), map_constant(1.0),
                                 map_constant(1.0), -1.0, 1.0),
                  InvalidArgument);
}

TEST_CASE("modified: non-trivial weight still solves the weighted equation") {
  auto m = solve_modified(map_constant(1.0), map_constant(0.0),
                          emap("1 + s / 4"), -0.9, 0.9);
  CHECK(m.max_boundary_error(101) < 1e-9);
  CHECK(m.max_residual(Rect{-0.4, 0.4, -0.3, 0.3}, 4, 4) < 1e-6);
}

// ---------------------------------------------------------------------------
// Light-cone structure.
// ---------------------------------------------------------------------------

TEST_CASE("lightcone: canonical frame quantities for flat data") {
  auto lc = solve_cauchy_lightcone(map_constant(1.0), map_constant(0.0),
                                   -1.0, 1.0);
  // Null companion is the constant vector e3.
  for (double s : {-0.8, 0.0, 0.3, 0.9}) {
    const LVec4 F = lc.F(s);
    CHECK(std::abs(F.x0) < 1e-12);
    CHECK(std::abs(F.x1) < 1e-12);
    CHECK(std::abs(F.x2) < 1e-12);
    CHECK(std::abs(F.x3 - 1.0) < 1e-12);
    // alpha = (1/2) nu - (1/2) nbar reflected: (1/2, -cos(u)/2, -sin(u)/2, 0).
    const LVec4 al = lc.alpha(s);
    CHECK(std::abs(al.x0 - 0.5) < 1e-12);
    CHECK(std::abs(al.x1 + 0.5 * std::cos(s)) < 1e-12);
    CHECK(std::abs(al.x2 + 0.5 * std::sin(s)) < 1e-12);
    CHECK(std::abs(al.x3) < 1e-12);
    // Lorentz relations: nu and alpha are null, <nu, alpha> = -1.
    const LVec4 nu = lc.nu(s);
    CHECK(std::abs(lorentz_inner(nu, nu)) < 1e-12);
    CHECK(std::abs(lorentz_inner(al, al)) < 1e-12);
    CHECK(std::abs(lorentz_inner(nu, al) + 1.0) < 1e-12);
  }
  // Schwarzian right-hand side is the constant 1/2.
  for (complex z : {complex(0.0), complex(0.3, 0.2), complex(-0.4, -0.1)})
    CHECK(std::abs(lc.U.value(z) - 0.5) < 1e-11);
  CHECK(field_error(lc.solution, [](double, double t) { return sech2(t); },
                    kStrip, 7) < 1e-9);
  CHECK(lc.branch == FBranch::upper);
}

TEST_CASE("lightcone: curved data and U == Upsilon identity") {
  // a = 1, d = -2: F = k0 nu + e3 with k0 = 1, U = (1 + k0^2)/2 = 1.
  auto lc = solve_cauchy_lightcone(map_constant(1.0), map_constant(-2.0),
                                   -1.0, 1.0);
  for (double s : {-0.5, 0.2, 0.7}) {
    const LVec4 F = lc.F(s);
    CHECK(std::abs(F.x0 - 1.0) < 1e-12);
    CHECK(std::abs(F.x1 - std::cos(s)) < 1e-12);
    CHECK(std::abs(F.x2 - std::sin(s)) < 1e-12);
    CHECK(std::abs(F.x3 - 1.0) < 1e-12);
    CHECK(std::abs(lc.U.value(s) - 1.0) < 1e-11);
  }
  // For variable data the frame assembly must reproduce the Schwarzian
  // coefficient of the analytic route at complex arguments.
  auto data = LiouvilleCauchyData::from_slope(emap("2 + sin(s)"),
                                              emap("cos(s)"), 1.0, -1.0, 1.0);
  auto lcv = solve_cauchy_lightcone(emap("2 + sin(s)"), emap("cos(s)"), -1.0,
                                    1.0);
  const AnalyticMap ups = liouville_upsilon(data);
  for (complex z : {complex(0.0), complex(0.4, 0.2), complex(-0.3, 0.35)})
    CHECK(std::abs(lcv.U.value(z) - ups.value(z)) < 1e-9);
  // Exponential case: U = (e^{2z} - 1)/2... shifted to the midpoint base.
  auto lce = solve_cauchy_lightcone(emap("exp(2 * s)"), map_constant(0.0),
                                    -1.0, 1.0);
  auto datae = LiouvilleCauchyData::from_slope(emap("exp(2 * s)"),
                                               map_constant(0.0), 1.0, -1.0,
                                               1.0);
  const AnalyticMap upse = liouville_upsilon(datae);
  for (complex z : {complex(0.1), complex(0.2, 0.3)})
    CHECK(std::abs(lce.U.value(z) - upse.value(z)) < 1e-9);
}

TEST_CASE("lightcone: the two branches yield different fields") {
  // Both branches meet the boundary data exactly (the projective assembly is
  // boundary-exact for any Schwarzian right-hand side), but only the upper
  // branch solves the interior equation: the report is measured, not assumed.
  auto up = solve_cauchy_lightcone(map_constant(1.0), map_constant(0.0),
                                   -1.0, 1.0, FBranch::upper);
  auto dn = solve_cauchy_lightcone(map_constant(1.0), map_constant(0.0),
                                   -1.0, 1.0, FBranch::lower);
  CHECK(std::abs(up.U.value(0.2) - 0.5) < 1e-11);
  CHECK(std::abs(dn.U.value(0.2) + 0.5) < 1e-11);
  CHECK(up.solution.max_boundary_value_error(51) < 1e-10);
  CHECK(dn.solution.max_boundary_value_error(51) < 1e-10);
  CHECK(up.solution.max_boundary_slope_error(51) < 1e-7);
  CHECK(dn.solution.max_boundary_slope_error(51) < 1e-7);
  const Rect r{-0.5, 0.5, -0.3, 0.3};
  CHECK(up.solution.max_interior_residual(r, 4, 4) < 1e-6);
  CHECK(dn.solution.max_interior_residual(r, 4, 4) > 0.1);
  // The fields themselves differ away from the axis.
  CHECK(std::abs(up.solution.phi(0.0, 0.25) - dn.solution.phi(0.0, 0.25)) >
        1e-3);
}

// ---------------------------------------------------------------------------
// Frenet integration.
// ---------------------------------------------------------------------------

TEST_CASE("frenet in Q(1): circles close with the right radius") {
  const double k0 = 1.0;
  auto curve = frenet_integrate_Qc(1.0, emap("s"), map_constant(k0),
                                   default_frenet_frame(1.0, 0.0));
  // Conservation over a long arc.
  for (double s = -10.0; s <= 10.0; s += 2.5) {
    CHECK(curve.membership_error(s) < 1e-8);
    CHECK(curve.speed_error(s) < 1e-8);
  }
  // The circle of geodesic curvature k0 has chordal radius 1/sqrt(1+k0^2)
  // and closes after arclength 2 pi / sqrt(1 + k0^2).
  const double period = 2.0 * kPi / std::sqrt(1.0 + k0 * k0);
  const auto p0 = curve.alpha(0.0);
  const auto p1 = curve.alpha(period);
  CHECK(std::hypot(p1[0] - p0[0], std::hypot(p1[1] - p0[1], p1[2] - p0[2])) <
        1e-8);
  // Chordal radius: distance from points to the circle axis.
  const auto q1 = curve.alpha(0.7);
  const auto q2 = curve.alpha(1.9);
  // axis direction from three points
  std::array<double, 3> v1{q1[0] - p0[0], q1[1] - p0[1], q1[2] - p0[2]};
  std::array<double, 3> v2{q2[0] - p0[0], q2[1] - p0[1], q2[2] - p0[2]};
  std::array<double, 3> ax{v1[1] * v2[2] - v1[2] * v2[1],
                           v1[2] * v2[0] - v1[0] * v2[2],
                           v1[0] * v2[1] - v1[1] * v2[0]};
  const double axn = std::sqrt(ax[0] * ax[0] + ax[1] * ax[1] + ax[2] * ax[2]);
  for (auto& x : ax) x /= axn;
  const double along = p0[0] * ax[0] + p0[1] * ax[1] + p0[2] * ax[2];
  const double rad = std::sqrt(std::max(
      0.0, p0[0] * p0[0] + p0[1] * p0[1] + p0[2] * p0[2] - along * along));
  CHECK(std::abs(rad - 1.0 / std::sqrt(1.0 + k0 * k0)) < 1e-8);
}

TEST_CASE("frenet in Q(c): variable curvature conserves the invariants") {
  auto kap = emap("1 + sin(s) / 2");
  auto c1 = frenet_integrate_Qc(1.0, emap("s"), kap,
                                default_frenet_frame(1.0, 0.0));
  auto cm = frenet_integrate_Qc(-1.0, emap("s"), kap,
                                default_frenet_frame(-1.0, 0.0));
  for (double s = -10.0; s <= 10.0; s += 2.5) {
    CHECK(c1.membership_error(s) < 1e-8);
    CHECK(c1.speed_error(s) < 1e-8);
    CHECK(cm.membership_error(s) < 1e-8);
    CHECK(cm.speed_error(s) < 1e-8);
    CHECK(cm.alpha(s)[0] >= 1.0 - 1e-12);  // stays on the upper sheet
  }
  // Non-unit parametrization: u' = sqrt(a) for a = 2 + sin(s).
  auto u = map_integral(map_sqrt(emap("2 + sin(s)")), 0.0, 0.0);
  auto cv = frenet_integrate_Qc(1.0, u, kap, default_frenet_frame(1.0, 0.0));
  for (double s = -3.0; s <= 3.0; s += 1.5) {
    CHECK(cv.membership_error(s) < 1e-9);
    CHECK(cv.speed_error(s) < 1e-9);
  }
  // Bad frame: off the space form.
  FrenetFrame bad = default_frenet_frame(1.0, 0.0);
  bad.alpha0 = {0.5, 0.0, 0.0};
  CHECK_THROWS_AS(frenet_integrate_Qc(1.0, emap("s"), kap, bad),
                  InvalidArgument);
}

TEST_CASE("frenet in the plane: circle, line, and spiral checks") {
  // kappa = 1: unit circle starting at the origin heading +x.
  auto circ = frenet_integrate_R2(map_constant(1.0), 0.0);
  for (double s : {0.5, 1.5, kPi}) {
    const auto p = circ.alpha(s);
    CHECK(std::abs(p[0] - std::sin(s)) < 1e-12);
    CHECK(std::abs(p[1] - (1.0 - std::cos(s))) < 1e-12);
  }
  const auto back = circ.alpha(2.0 * kPi);
  CHECK(std::hypot(back[0], back[1]) < 1e-12);

  // kappa = 0: straight line.
  auto line = frenet_integrate_R2(map_constant(0.0), 0.0);
  const auto q = line.alpha(3.7);
  CHECK(std::abs(q[0] - 3.7) < 1e-13);
  CHECK(std::abs(q[1]) < 1e-13);

  // kappa = s (Euler spiral): verify the Frenet relations by differences.
  auto spiral = frenet_integrate_R2(emap("s"), 0.0);
  const double h = 1e-5;
  for (double s : {0.3, 1.0, 1.7}) {
    const auto pm = spiral.alpha(s - h);
    const auto pp = spiral.alpha(s + h);
    const auto pc = spiral.alpha_prime(s);
    CHECK(std::abs((pp[0] - pm[0]) / (2 * h) - pc[0]) < 1e-9);
    CHECK(std::abs((pp[1] - pm[1]) / (2 * h) - pc[1]) < 1e-9);
    CHECK(std::abs(std::hypot(pc[0], pc[1]) - 1.0) < 1e-12);
    // theta'(s) = kappa(s) = s.
    const auto tm = spiral.alpha_prime(s - h);
    const auto tp = spiral.alpha_prime(s + h);
    const double dth = (std::atan2(tp[1], tp[0]) - std::atan2(tm[1], tm[0])) /
                       (2 * h);
    CHECK(std::abs(dth - s) < 1e-8);
  }
  CHECK(spiral.membership_error(1.0) == 0.0);
  CHECK(spiral.speed_error(1.0) < 1e-12);
}

TEST_CASE("sphere curves through the Schwarzian match direct integration") {
  auto kap = emap("1 + sin(s) / 2");
  auto direct = frenet_integrate_Qc(1.0, emap("s"), kap,
                                    default_frenet_frame(1.0, 0.0));
  auto via = sphere_frenet_via_schwarzian(kap, -2.0, 2.0);
  std::vector<std::array<double, 3>> from, to;
  double worst = 0.0;
  for (double s = -1.8; s <= 1.8; s += 0.3) {
    const auto pa = direct.alpha(s);
    const auto pb = via.alpha(s);
    from.push_back(pb);
    to.push_back(pa);
    worst = std::max({worst, std::abs(pa[0] - pb[0]),
                      std::abs(pa[1] - pb[1]), std::abs(pa[2] - pb[2])});
    CHECK(via.membership_error(s) < 1e-8);
    CHECK(via.speed_error(s) < 1e-8);
  }
  // The canonical seeds coincide, so the curves match pointwise, which is
  // stronger than the required congruence...
  CHECK(worst < 1e-7);
  // ...and the congruence check via rotation fitting also passes.
  const auto rot = procrustes_rotation(from, to);
  CHECK(procrustes_residual(rot, from, to) < 1e-7);
}

TEST_CASE("procrustes fitting recovers a known rotation") {
  // Rotation by 0.7 about the z-axis, then 0.3 about x.
  const double c1 = std::cos(0.7), s1 = std::sin(0.7);
  const double c2 = std::cos(0.3), s2 = std::sin(0.3);
  const std::array<std::array<double, 3>, 3> rz{
      {{c1, -s1, 0}, {s1, c1, 0}, {0, 0, 1}}};
  const std::array<std::array<double, 3>, 3> rx{
      {{1, 0, 0}, {0, c2, -s2}, {0, s2, c2}}};
  std::array<std::array<double, 3>, 3> r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += rx[i][k] * rz[k][j];
  std::vector<std::array<double, 3>> from, to;
  for (double s = 0.0; s < 6.0; s += 0.5) {
    const std::array<double, 3> p{std::cos(s), std::sin(s),
                                  std::sin(2.0 * s) / 2.0};
    std::array<double, 3> q{};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) q[i] += r[i][k] * p[k];
    from.push_back(p);
    to.push_back(q);
  }
  const auto fit = procrustes_rotation(from, to);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(fit[i][j] - r[i][j]));
  CHECK(worst < 1e-12);
  CHECK(procrustes_residual(fit, from, to) < 1e-12);
}

// ---------------------------------------------------------------------------
// Holonomy.
// ---------------------------------------------------------------------------

TEST_CASE("holonomy: constant-curvature oracle angles") {
  struct Case {
    double k0;
    bool closes;
    int folds;
  };
  const Case cases[] = {{0.0, true, 1},
                        {1.0, false, 0},
                        {std::sqrt(3.0), true, 1},
                        {2.0, false, 0}};
  for (const auto& tc : cases) {
    CAPTURE(tc.k0);
    auto res = holonomy_S2(map_constant(1.0), map_constant(tc.k0), 2.0 * kPi);
    const double expect =
        std::fmod(2.0 * kPi * std::sqrt(1.0 + tc.k0 * tc.k0), 2.0 * kPi);
    CHECK(angular_gap(res.theta, expect) < 1e-6);
    CHECK(res.orthogonality_error < 1e-8);
    CHECK(res.closes == tc.closes);
    if (tc.closes) {
      CHECK(res.folds == tc.folds);
      CHECK(res.verdict == "closed after 1 period");
    } else {
      CHECK(res.verdict == "no closure detected at this precision");
    }
  }
  // An angle beyond pi exercises the axis disambiguation.
  auto res = holonomy_S2(map_constant(1.0), map_constant(1.2), 2.0 * kPi);
  const double expect =
      std::fmod(2.0 * kPi * std::sqrt(1.0 + 1.44), 2.0 * kPi);
  CHECK(expect > kPi);
  CHECK(angular_gap(res.theta, expect) < 1e-6);
}

TEST_CASE("holonomy: engineered rational angle closes after q periods") {
  // sqrt(1 + k0^2) = 4/3 gives theta = 2 pi / 3: closure after 3 periods.
  const double k0 = std::sqrt(16.0 / 9.0 - 1.0);
  auto res = holonomy_S2(map_constant(1.0), map_constant(k0), 2.0 * kPi);
  CHECK(std::abs(res.theta - 2.0 * kPi / 3.0) < 1e-9);
  CHECK(res.closes);
  CHECK(res.folds == 3);
  CHECK(res.verdict == "closed after 3 periods");
}

TEST_CASE("holonomy: angle is invariant under rotating the initial frame") {
  auto kap = emap("1 + sin(s) / 4");
  auto up = emap("1 + cos(s) / 5");
  auto base = holonomy_S2(up, kap, 2.0 * kPi);
  // Rotate the frame by 0.9 about (1,1,1)/sqrt(3).
  const double ang = 0.9;
  const double n3 = 1.0 / std::sqrt(3.0);
  const double ca = std::cos(ang), sa = std::sin(ang);
  std::array<std::array<double, 3>, 3> r{};
  const double ux = n3, uy = n3, uz = n3;
  r[0] = {ca + ux * ux * (1 - ca), ux * uy * (1 - ca) - uz * sa,
          ux * uz * (1 - ca) + uy * sa};
  r[1] = {uy * ux * (1 - ca) + uz * sa, ca + uy * uy * (1 - ca),
          uy * uz * (1 - ca) - ux * sa};
  r[2] = {uz * ux * (1 - ca) - uy * sa, uz * uy * (1 - ca) + ux * sa,
          ca + uz * uz * (1 - ca)};
  // Rows of the rotated frame are R applied to the identity frame rows.
  std::array<std::array<double, 3>, 3> frame{};
  for (int v = 0; v < 3; ++v)
    for (int i = 0; i < 3; ++i) {
      frame[v][i] = 0.0;
      for (int k = 0; k < 3; ++k)
        frame[v][i] += r[i][k] * (v == k ? 1.0 : 0.0);
    }
  auto rot = holonomy_S2(up, kap, 2.0 * kPi, frame);
  CHECK(std::abs(base.theta - rot.theta) < 1e-9);
  CHECK(rot.orthogonality_error < 1e-8);
}

TEST_CASE("holonomy: preconditions are enforced") {
  CHECK_THROWS_AS(holonomy_S2(map_constant(1.0), emap("s"), 2.0 * kPi),
                  InvalidArgument);  // kappa not periodic
  CHECK_THROWS_AS(holonomy_S2(emap("0 - 1"), map_constant(1.0), 2.0 * kPi),
                  InvalidArgument);  // u' negative
  std::array<std::array<double, 3>, 3> skew{
      {{1, 0, 0}, {0.5, 1, 0}, {0, 0, 1}}};
  CHECK_THROWS_AS(holonomy_S2(map_constant(1.0), map_constant(1.0),
                              2.0 * kPi, skew),
                  InvalidArgument);  // frame not orthonormal
}

// ---------------------------------------------------------------------------
// Sampling and masking.
// ---------------------------------------------------------------------------

TEST_CASE("sampling masks singular nodes and keeps accurate ones") {
  // c = -1, a = 1: phi = sec^2 t blows up on the lines t = +-pi/2. The grid
  // below puts two node rows exactly on the poles.
  auto data = LiouvilleCauchyData::from_slope(map_constant(1.0),
                                              map_constant(0.0), -1.0, -1.0,
                                              1.0);
  auto sol = solve_cauchy_analytic(data);
  const Grid g = sol.sample(Rect{-1.0, 1.0, -kPi, kPi}, 9, 5);
  CHECK(g.masked_count() == 2 * g.ns);  // the two pole rows
  int checked = 0;
  for (int it = 0; it < g.nt; ++it)
    for (int is = 0; is < g.ns; ++is) {
      const auto& cell = g.at(is, it);
      const double t = g.t(it);
      if (std::abs(std::cos(t)) < 1e-8) {
        CHECK(cell.masked);
        continue;
      }
      CHECK_FALSE(cell.masked);
      CHECK(std::abs(cell.value.real() - 1.0 / std::pow(std::cos(t), 2)) <
            1e-8);
      ++checked;
    }
  CHECK(checked == 3 * g.ns);
}

TEST_CASE("solution structure accessors") {
  auto data = LiouvilleCauchyData::from_slope(map_constant(1.0),
                                              map_constant(0.0), 1.0, -1.0,
                                              1.0);
  auto sol = solve_cauchy_analytic(data);
  CHECK(sol.c() == 1.0);
  CHECK(sol.data().s0() == 0.0);
  CHECK(sol.has_developing_map());
  CHECK(sol.projective_pair().has_value());
  // The developing map has the canonical 2-jet at the midpoint.
  const Jet j = sol.developing_map().jet(0.0, 2);
  CHECK(std::abs(j[0]) < 1e-12);
  CHECK(std::abs(j[1] - 0.5) < 1e-12);
  CHECK(std::abs(j[2]) < 1e-12);
  // c == 0 is rejected by the curved-route solvers.
  auto d0 = LiouvilleCauchyData::from_slope(map_constant(1.0),
                                            map_constant(0.0), 0.0, -1.0,
                                            1.0);
  CHECK_THROWS_AS(solve_cauchy_analytic(d0), InvalidArgument);
  CHECK_THROWS_AS(solve_cauchy_geometric(d0), InvalidArgument);
}
