#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cmc1/exprlang.hpp"

using namespace cmc1;

TEST_CASE("evaluation basics") {
  CHECK(std::abs(parse_expr("1 + 2*z^2", "z").eval(complex(2.0)) - 9.0) == 0.0);
  CHECK(std::abs(parse_expr("exp(i*z)", "z").eval(complex(kPi, 0)) + 1.0) <
        1e-15);
  CHECK(std::abs(parse_expr("pi", "z").eval(complex(0)) - kPi) == 0.0);
  CHECK(std::abs(parse_expr("e", "z").eval(complex(0)) - std::exp(1.0)) == 0.0);
  CHECK(std::abs(parse_expr("i^2", "z").eval(complex(0)) + 1.0) < 1e-15);
}

TEST_CASE("precedence and associativity") {
  const complex z(0.0);
  // ^ binds tighter than unary minus: -2^2 = -4.
  CHECK(std::abs(parse_expr("-2^2", "z").eval(z) + 4.0) == 0.0);
  // ^ is right-associative: 2^3^2 = 2^9 = 512.
  CHECK(std::abs(parse_expr("2^3^2", "z").eval(z) - 512.0) == 0.0);
  // * binds tighter than +.
  CHECK(std::abs(parse_expr("2+3*4", "z").eval(z) - 14.0) == 0.0);
  // Left-assoc subtraction and division.
  CHECK(std::abs(parse_expr("8-3-2", "z").eval(z) - 3.0) == 0.0);
  CHECK(std::abs(parse_expr("8/4/2", "z").eval(z) - 1.0) == 0.0);
  // Double unary minus.
  CHECK(std::abs(parse_expr("--3", "z").eval(z) - 3.0) == 0.0);
  // Whitespace-insensitive.
  CHECK(std::abs(parse_expr(" 1\t+ 2 * z ^ 2 ", "z").eval(complex(2.0)) - 9.0) ==
        0.0);
}

TEST_CASE("jets from expressions") {
  // z^3 at 1, order 3: coefficients (1, 3, 3, 1).
  const Jet j = parse_expr("z^3", "z").eval_jet(complex(1.0), 3);
  CHECK(std::abs(j[0] - 1.0) < 1e-15);
  CHECK(std::abs(j[1] - 3.0) < 1e-15);
  CHECK(std::abs(j[2] - 3.0) < 1e-15);
  CHECK(std::abs(j[3] - 1.0) < 1e-15);

  // 1/z at 0 raises a pole signal.
  CHECK_THROWS_AS(parse_expr("1/z", "z").eval_jet(complex(0.0), 2), PoleSignal);

  // z^3 jet exists at the base-point zero (integer power path).
  const Jet k = parse_expr("z^3", "z").eval_jet(complex(0.0), 3);
  CHECK(std::abs(k[3] - 1.0) < 1e-15);

  // Negative integer exponent.
  const Jet m = parse_expr("z^-2", "z").eval_jet(complex(2.0), 1);
  CHECK(std::abs(m[0] - 0.25) < 1e-15);
  CHECK(std::abs(m[1] + 0.25) < 1e-15);
}

TEST_CASE("syntax errors carry offsets and expectations") {
  try {
    parse_expr("exp(", "z");
    CHECK(false);
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 4);
    CHECK(!e.expected().empty());
  }
  CHECK_THROWS_AS(parse_expr("1+*2", "z"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("(1+2", "z"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("1 2", "z"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("", "z"), SyntaxError);
  CHECK_THROWS_AS(parse_expr("2z", "z"), SyntaxError);  // no implicit product
  try {
    parse_expr("3*w+1", "z");
    CHECK(false);
  } catch (const UnknownIdentifier& e) {
    CHECK(std::string(e.what()).find('w') != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expr("frob(z)", "z"), UnknownIdentifier);
}

TEST_CASE("round trip: print then re-parse") {
  const std::vector<std::string> corpus = {
      "1+2*z^2", "exp(i*z)", "tan(z/2)", "z^3", "1/z", "-z", "--z", "-(z+1)",
      "2^3^2", "-2^2", "(1+z)*(1-z)", "sqrt(4+z)", "sin(z)*cos(z)",
      "sinh(z)+cosh(z)", "tanh(z)", "log(1+z)", "pi*z", "e^z", "i*z^2",
      "z/(1+z^2)", "2+sin(z)", "cos(2*z)", "exp(-z^2/2)", "1/(2+cos(z))",
      "z^2+z+1", "(z-1)/(z+1)", "sqrt(z^2+1)", "exp(z)*sin(z)", "0.5*z",
      "1.25e-3*z", "z^-2", "3-z-1", "8/z/2", "-(-z)", "sin(cos(z))",
      "exp(exp(z))", "z^(1+1)", "(2+3)*z", "2+3*z", "1-(2-z)", "z*(-1)",
      "pi+e+i", "sqrt(2)*z", "tan(pi/4+z)", "log(exp(z))", "z^0", "0*z+7",
      "cosh(z)^2-sinh(z)^2", "(z)", "- - z"};
  int checked = 0;
  for (const std::string& text : corpus) {
    const Expr e1 = parse_expr(text, "z");
    const std::string printed = e1.print();
    const Expr e2 = parse_expr(printed, "z");
    // Printing must be a fixed point and values must agree exactly.
    CHECK(e2.print() == printed);
    for (double s : {-0.7, 0.3, 1.1}) {
      const complex z(s, 0.2);
      complex v1, v2;
      bool threw1 = false, threw2 = false;
      try {
        v1 = e1.eval(z);
      } catch (const Error&) {
        threw1 = true;
      }
      try {
        v2 = e2.eval(z);
      } catch (const Error&) {
        threw2 = true;
      }
      CHECK(threw1 == threw2);
      if (!threw1) CHECK(std::abs(v1 - v2) == 0.0);
    }
    ++checked;
  }
  CHECK(checked == static_cast<int>(corpus.size()));
  CHECK(checked >= 50);
}

TEST_CASE("printer emits minimal parentheses") {
  CHECK(parse_expr("(2+3)*z", "z").print() == "(2+3)*z");
  CHECK(parse_expr("2+(3*z)", "z").print() == "2+3*z");
  CHECK(parse_expr("(z^2)^3", "z").print() == "(z^2)^3");
  CHECK(parse_expr("z^(2^3)", "z").print() == "z^2^3");
  CHECK(parse_expr("-(z^2)", "z").print() == "-z^2");
  CHECK(parse_expr("(-z)^2", "z").print() == "(-z)^2");
}

TEST_CASE("expression jets match finite differences") {
  const std::vector<std::string> corpus = {
      "exp(i*z)", "tan(z/2)", "z/(1+z^2)", "sqrt(4+z^2)", "log(2+z)",
      "sin(z)*cosh(z)", "exp(-z^2/2)"};
  for (const std::string& text : corpus) {
    const Expr e = parse_expr(text, "z");
    const complex z0(0.23, -0.11);
    const Jet j = e.eval_jet(z0, 2);
    const double h = 1e-6;
    const complex fd1 = (e.eval(z0 + h) - e.eval(z0 - h)) / (2 * h);
    const complex fd2 =
        (e.eval(z0 + h) - 2.0 * e.eval(z0) + e.eval(z0 - h)) / (h * h);
    CHECK(std::abs(j.derivative(1) - fd1) <
          1e-7 * std::max(1.0, std::abs(fd1)));
    CHECK(std::abs(j.derivative(2) - fd2) <
          1e-3 * std::max(1.0, std::abs(fd2)));
  }
}

TEST_CASE("structural identity") {
  CHECK(Expr::identical(parse_expr("1+z", "z"), parse_expr("1 + z", "z")));
  CHECK(!Expr::identical(parse_expr("1+z", "z"), parse_expr("z+1", "z")));
}

TEST_CASE("as_map flags") {
  CHECK(parse_expr("2+sin(z)", "z").as_map().real_on_axis());
  CHECK(!parse_expr("exp(i*z)", "z").as_map().real_on_axis());
  const AnalyticMap f = parse_expr("cos(2*z)", "z").as_map();
  CHECK(std::abs(f.value(complex(0.7, 0.0)) - std::cos(1.4)) < 1e-14);
}
