#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cmc1/analytic.hpp"
#include "cmc1/exprlang.hpp"
#include "cmc1/jet.hpp"
#include "cmc1/jet2.hpp"

using namespace cmc1;

namespace {
std::mt19937_64 rng(7041776);
double urand(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(rng);
}
}  // namespace

TEST_CASE("jet arithmetic basics") {
  // exp of the variable jet at 0, order 2 -> (1, 1, 1/2).
  const Jet e = jet_exp(Jet::variable(0.0, 2));
  CHECK(std::abs(e[0] - 1.0) < 1e-15);
  CHECK(std::abs(e[1] - 1.0) < 1e-15);
  CHECK(std::abs(e[2] - 0.5) < 1e-15);

  // (1+z)(1-z) at 0, order 2 -> (1, 0, -1).
  const Jet z = Jet::variable(0.0, 2);
  const Jet p = (1.0 + z) * (1.0 - z);
  CHECK(std::abs(p[0] - 1.0) < 1e-15);
  CHECK(std::abs(p[1]) < 1e-15);
  CHECK(std::abs(p[2] + 1.0) < 1e-15);

  // sqrt(4+z) at 0, order 1 -> (2, 1/4).
  const Jet s = jet_sqrt(4.0 + Jet::variable(0.0, 1));
  CHECK(std::abs(s[0] - 2.0) < 1e-15);
  CHECK(std::abs(s[1] - 0.25) < 1e-15);

  // Division pole signal.
  CHECK_THROWS_AS(jet_recip(Jet::variable(0.0, 3)), PoleSignal);
  CHECK_THROWS_AS(jet_log(Jet::variable(0.0, 3)), PoleSignal);
  CHECK_THROWS_AS(jet_sqrt(Jet::variable(0.0, 3)), PoleSignal);
}

TEST_CASE("jet elementary functions against closed forms") {
  const complex z0(0.3, -0.2);
  const int n = 6;
  const Jet z = Jet::variable(z0, n);

  // tan' = 1 + tan^2 chain checked through sin/cos recurrences.
  const Jet t = jet_tan(z);
  const Jet lhs = t.derivative_jet();
  const Jet rhs = (1.0 + t * t).truncated(lhs.order());
  for (int k = 0; k <= lhs.order(); ++k) CHECK(std::abs(lhs[k] - rhs[k]) < 1e-12);

  // cosh^2 - sinh^2 = 1.
  const Jet d = jet_cosh(z) * jet_cosh(z) - jet_sinh(z) * jet_sinh(z);
  CHECK(std::abs(d[0] - 1.0) < 1e-13);
  for (int k = 1; k <= d.order(); ++k) CHECK(std::abs(d[k]) < 1e-12);

  // log(exp(z)) = z.
  const Jet l = jet_log(jet_exp(z));
  CHECK(std::abs(l[0] - z0) < 1e-14);
  CHECK(std::abs(l[1] - 1.0) < 1e-13);
  for (int k = 2; k <= n; ++k) CHECK(std::abs(l[k]) < 1e-13);

  // Integer powers work at zeros of the base.
  const Jet cube = jet_pow(Jet::variable(0.0, 4), 3.0);
  CHECK(std::abs(cube[3] - 1.0) < 1e-15);
  CHECK(std::abs(cube[0]) + std::abs(cube[1]) + std::abs(cube[2]) < 1e-15);
}

TEST_CASE("jet derivatives match finite differences") {
  // Random smooth expressions, first three derivatives vs central FD.
  const char* exprs[] = {"exp(z)*sin(z)", "1/(2+cos(z))", "sqrt(4+z^2)",
                         "exp(i*z)+z^3", "tanh(z)/(2+z)"};
  for (const char* text : exprs) {
    const Expr e = parse_expr(text, "z");
    for (int trial = 0; trial < 4; ++trial) {
      const complex z0(urand(-0.5, 0.5), urand(-0.3, 0.3));
      const Jet j = e.eval_jet(z0, 3);
      // Step sizes balance truncation against roundoff per order.
      const double hs[] = {0.0, 1e-6, 1e-4, 1e-3};
      const double tols[] = {0.0, 1e-8, 1e-6, 1e-4};
      for (int k = 1; k <= 3; ++k) {
        const double h = hs[k];
        complex fd;
        if (k == 1)
          fd = (e.eval(z0 + h) - e.eval(z0 - h)) / (2 * h);
        else if (k == 2)
          fd = (e.eval(z0 + h) - 2.0 * e.eval(z0) + e.eval(z0 - h)) / (h * h);
        else
          fd = (e.eval(z0 + 2 * h) - 2.0 * e.eval(z0 + h) +
                2.0 * e.eval(z0 - h) - e.eval(z0 - 2 * h)) /
               (2 * h * h * h);
        const complex an = j.derivative(k);
        CHECK(std::abs(an - fd) <= tols[k] * std::max(1.0, std::abs(an)));
      }
    }
  }
}

TEST_CASE("schwarzian derivative") {
  // Moebius maps have vanishing Schwarzian.
  for (int k = 0; k < 10; ++k) {
    const complex a(urand(-2, 2), urand(-2, 2)), b(urand(-2, 2), urand(-2, 2));
    complex c(urand(-2, 2), urand(-2, 2)), d(urand(-2, 2), urand(-2, 2));
    if (std::abs(a * d - b * c) < 0.3) d += complex(1.0);
    const AnalyticMap mob = map_from_jet_fn(
        [=](const Jet& z) { return jet_div(a * z + b, c * z + d); });
    const complex z0(urand(-1, 1), urand(-1, 1));
    CHECK(std::abs(schwarzian(mob, z0)) < 1e-8);
  }

  // f = e^{lambda z} has Schwarzian -lambda^2/2.
  for (const complex lambda : {complex(1, 0), complex(0, 2), complex(1.5, -0.5)}) {
    const AnalyticMap f = map_from_jet_fn(
        [lambda](const Jet& z) { return jet_exp(lambda * z); });
    CHECK(std::abs(schwarzian(f, complex(0.2, 0.1)) + lambda * lambda / 2.0) <
          1e-10);
  }

  // f = tan(z/2) has Schwarzian 1/2.
  const AnalyticMap t = map_from_jet_fn(
      [](const Jet& z) { return jet_tan(0.5 * z); });
  CHECK(std::abs(schwarzian(t, complex(0.3, 0.0)) - 0.5) < 1e-10);

  // Cocycle property: {mu o f, z} = {f, z} for Moebius mu.
  const char* fs[] = {"exp(z)", "tan(z/2)", "z^3+2*z", "1/(1+z^2)"};
  for (const char* text : fs) {
    const Expr e = parse_expr(text, "z");
    const AnalyticMap f = e.as_map();
    for (int k = 0; k < 5; ++k) {
      const complex a(urand(-2, 2), urand(-2, 2)), b(urand(-2, 2), urand(-2, 2));
      complex c(urand(-2, 2), urand(-2, 2)), d(urand(-2, 2), urand(-2, 2));
      if (std::abs(a * d - b * c) < 0.3) d += complex(1.5);
      const AnalyticMap mf = map_from_jet_fn([=, &e](const Jet& z) {
        const Jet fj = e.eval_jet(z.base(), z.order());
        return jet_div(a * fj + b, c * fj + d);
      });
      complex z0(urand(0.2, 0.8), urand(-0.2, 0.2));
      try {
        const complex s1 = schwarzian(f, z0);
        const complex s2 = schwarzian(mf, z0);
        CHECK(std::abs(s1 - s2) <= 1e-8 * std::max(1.0, std::abs(s1)));
      } catch (const PoleSignal&) {
        // z^3+2z has critical points; skip the unlucky draw.
      }
    }
  }
}

TEST_CASE("solve_schwarzian closed forms") {
  // U = 0, default init at z0: g(z) = z - z0.
  const complex z0(0.4, 0.0);
  const ProjectivePair g0 = solve_schwarzian(map_constant(0.0), z0);
  for (double s : {-0.5, 0.0, 0.7, 1.3}) {
    const complex z(s, 0.25);
    CHECK(std::abs(g0.value(z) - (z - z0)) < 1e-12);
  }

  // U = 2 m^2, default init at 0: g = tan(m z)/m.
  for (double m : {0.5, 1.0, 1.7}) {
    const ProjectivePair g =
        solve_schwarzian(map_constant(2.0 * m * m), complex(0.0));
    for (double s : {-0.8, -0.2, 0.3, 0.9}) {
      const complex z(s, 0.2);
      const complex expect = std::tan(m * z) / m;
      CHECK(std::abs(g.value(z) - expect) < 1e-10);
    }
    // {g, z} = U at interior points.
    const AnalyticMap gm = g.as_map();
    for (double s : {-0.6, 0.1, 0.5}) {
      CHECK(std::abs(schwarzian(gm, complex(s, 0.1)) - 2.0 * m * m) < 1e-8);
    }
  }

  // Prescribed non-default init is reproduced.
  SchwarzianInit init{complex(0.3, -0.1), complex(1.2, 0.4), complex(-0.5, 0.2)};
  const ProjectivePair g = solve_schwarzian(map_constant(1.0), complex(0.0), init);
  const Jet j = g.jet(complex(0.0), 2);
  CHECK(std::abs(j.value() - init.g0) < 1e-10);
  CHECK(std::abs(j.derivative(1) - init.g1) < 1e-10);
  CHECK(std::abs(j.derivative(2) - init.g2) < 1e-10);
}

TEST_CASE("solve_schwarzian residual and Wronskian on a nonconstant U") {
  const AnalyticMap u = parse_map("2+sin(z)", "z");
  const ProjectivePair g = solve_schwarzian(u, complex(0.5, 0.0));
  const AnalyticMap gm = g.as_map();
  // Residual at 50 interior points.
  for (int k = 0; k < 50; ++k) {
    const complex z(urand(-1.0, 2.0), urand(-0.6, 0.6));
    CHECK(std::abs(schwarzian(gm, z) - u.value(z)) < 1e-8);
  }
  // Wronskian constancy (relative).
  const complex w0 = g.wronskian();
  for (double s : {-1.0, -0.3, 0.2, 0.9, 1.8}) {
    CHECK(std::abs(g.wronskian_at(complex(s, 0.3)) - w0) < 1e-8 * std::abs(w0));
  }
}

TEST_CASE("path_integral") {
  CHECK(std::abs(path_integral(map_identity(), 0.0, 1.0) - 0.5) < 1e-12);
  const AnalyticMap ez = parse_map("exp(z)", "z");
  CHECK(std::abs(path_integral(ez, complex(0), complex(0, kPi)) - complex(-2.0)) <
        1e-12);
  const AnalyticMap eiz = parse_map("exp(i*z)", "z");
  CHECK(std::abs(path_integral(eiz, complex(0), complex(2 * kPi, 0))) < 1e-12);

  const AnalyticMap excl =
      map_identity().with_excluded({complex(0.5, 0.0)});
  CHECK_THROWS_AS(path_integral(excl, complex(0), complex(1)), ExcludedPointOnPath);
}

TEST_CASE("continuation_grid") {
  const AnalyticMap f = parse_map("exp(z)", "z");
  const Grid g = continuation_grid(f, Rect{0, 1, 0, 1}, 5, 5);
  CHECK(g.masked_count() == 0);
  double emax = 0;
  for (int is = 0; is < 5; ++is)
    for (int it = 0; it < 5; ++it) {
      const complex z(g.s(is), g.t(it));
      emax = std::max(emax, std::abs(g.at(is, it).value - std::exp(z)));
    }
  CHECK(emax < 1e-12);

  // tan(z/2) with its pole at pi declared: nodes near pi get masked.
  const AnalyticMap t =
      parse_map("tan(z/2)", "z").with_excluded({complex(kPi, 0.0)});
  const Grid gt = continuation_grid(t, Rect{kPi - 0.01, kPi + 0.01, -0.0005, 0.0005},
                                    9, 3);
  CHECK(gt.masked_count() > 0);

  // Unadvertised pole: exact hit is masked rather than thrown.
  const AnalyticMap t2 = parse_map("tan(z/2)", "z");
  const Grid gt2 = continuation_grid(t2, Rect{kPi - 1, kPi + 1, 0, 0}, 3, 1);
  CHECK(gt2.at(1, 0).masked);
}

TEST_CASE("AnalyticMap purity and real-axis flags") {
  const AnalyticMap f = parse_map("exp(z)*cos(z)", "z");
  const complex z(0.37, 0.11);
  CHECK(std::abs(f.value(z) - f.value(z)) < 1e-13);
  CHECK(f.real_on_axis());
  CHECK(std::abs(f.value(complex(0.4, 0.0)).imag()) < 1e-10);
  CHECK(!parse_map("exp(i*z)", "z").real_on_axis());
}

TEST_CASE("map_conj and map_integral") {
  const AnalyticMap f = parse_map("exp(i*z)+z^2", "z");
  const AnalyticMap fc = map_conj(f);
  const complex z(0.3, 0.4);
  CHECK(std::abs(fc.value(z) - std::conj(f.value(std::conj(z)))) < 1e-13);
  // (f*)' = (f')* as maps.
  const AnalyticMap d1 = map_derivative(fc);
  const AnalyticMap d2 = map_conj(map_derivative(f));
  CHECK(std::abs(d1.value(z) - d2.value(z)) < 1e-12);

  const AnalyticMap F = map_integral(parse_map("cos(z)", "z"), 0.0, 0.0);
  CHECK(std::abs(F.value(complex(1.2, 0.0)) - std::sin(1.2)) < 1e-11);
  const Jet j = F.jet(complex(0.5, 0.0), 3);
  CHECK(std::abs(j.derivative(1) - std::cos(0.5)) < 1e-12);
  CHECK(std::abs(j.derivative(2) + std::sin(0.5)) < 1e-12);
}

TEST_CASE("Jet2 arithmetic and partials") {
  // f(z,w) = exp(z) * (1 + w)^2 assembled from outer products.
  const complex z0(0.2, 0.1), w0(-0.1, 0.3);
  const Jet ez = jet_exp(Jet::variable(z0, 4));
  const Jet w = Jet::variable(w0, 4);
  const Jet wp = (1.0 + w) * (1.0 + w);
  const Jet2 f = Jet2::outer(ez, wp, 3, 3);
  CHECK(std::abs(f.value() - std::exp(z0) * std::pow(1.0 + w0, 2.0)) < 1e-13);
  CHECK(std::abs(f.partial(1, 1) - std::exp(z0) * 2.0 * (1.0 + w0)) < 1e-12);
  CHECK(std::abs(f.partial(2, 2) - std::exp(z0) * 2.0) < 1e-12);

  // Division and sqrt invert squaring.
  const Jet2 q = jet2_div(f * f, f);
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j)
      CHECK(std::abs(q.at(i, j) - f.at(i, j)) < 1e-12);
  const Jet2 r = jet2_sqrt(f * f);
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j)
      CHECK(std::abs(r.at(i, j) - f.at(i, j)) < 1e-11);
}

TEST_CASE("Mobius helpers") {
  const Mobius m = mobius_from_three_points(complex(0), complex(1), complex(2),
                                            complex(1), complex(0, 1), complex(-1));
  CHECK(std::abs(m.apply(complex(0)) - complex(1)) < 1e-12);
  CHECK(std::abs(m.apply(complex(1)) - complex(0, 1)) < 1e-12);
  CHECK(std::abs(m.apply(complex(2)) - complex(-1)) < 1e-12);

  // w -> (w-1)/(w+1) normalized is in SU(2) up to scaling... it is not; but
  // rotations are. w -> (cos a * w - sin a)/(sin a * w + cos a):
  const double a = 0.7;
  const Mobius rot{std::cos(a), -std::sin(a), std::sin(a), std::cos(a)};
  CHECK(rot.is_su2(1e-12));
  const Mobius not_unitary{1.0, 1.0, 0.0, 1.0};
  CHECK(!not_unitary.is_su2(1e-6));
}
