#pragma once
/**
 * @file tolerances.hpp
 * @brief Central numeric tolerances and small shared numeric helpers.
 *
 * Defaults follow the library contracts; individual entry points take a
 * Tolerances value so callers can tighten or relax them globally.
 */

#include <cmath>
#include <complex>

namespace cmc1 {

using complex = std::complex<double>;

/// Knobs shared across modules. Members are named after what they gate.
struct Tolerances {
  double membership = 1e-9;       ///< space-form membership / data validation
  double algebra = 1e-12;         ///< exact linear-algebra identities
  double unimodular = 1e-9;       ///< |det(Phi) - 1| accepted for group elements
  double mask_radius = 1e-3;      ///< distance to excluded points that masks a grid node
  double quadrature = 1e-12;      ///< absolute target of adaptive path integration
  double ode_step = 1e-15;        ///< relative size of the last retained Taylor term
  int jet_order = 8;              ///< default jet order for analytic queries
  int ode_order = 24;             ///< Taylor order of the ODE stepper
};

inline const Tolerances& default_tol() {
  static const Tolerances t{};
  return t;
}

/// |x - y| for complex values (convenience).
inline double cabs_diff(complex x, complex y) { return std::abs(x - y); }

inline bool is_finite(complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

constexpr double kPi = 3.14159265358979323846264338327950288;

}  // namespace cmc1
