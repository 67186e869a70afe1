#pragma once
/**
 * @file errors.hpp
 * @brief Typed error hierarchy shared by every module.
 *
 * Every failure mode that a caller can react to gets its own exception
 * type; all of them derive from Error so CLI code can catch one base.
 */

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmc1 {

/// Base class of all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Division / sqrt / log of a series whose leading coefficient vanishes,
/// or evaluation of a function at one of its poles.
class PoleSignal : public Error {
 public:
  explicit PoleSignal(const std::string& what) : Error(what) {}
};

/// Taylor step size collapsed (singularity of the ODE coefficients on the
/// integration path); the caller must reroute or shrink the domain.
class StepFailure : public Error {
 public:
  explicit StepFailure(const std::string& what) : Error(what) {}
};

/// Straight-line integration path passes through an excluded point.
class ExcludedPointOnPath : public Error {
 public:
  explicit ExcludedPointOnPath(const std::string& what) : Error(what) {}
};

/// Cauchy datum a(s) touches zero (the problem assumes a > 0).
class DegenerateData : public Error {
 public:
  explicit DegenerateData(const std::string& what) : Error(what) {}
};

/// No continuous branch of the light-cone curve system exists on the interval.
class BranchJump : public Error {
 public:
  explicit BranchJump(const std::string& what) : Error(what) {}
};

/// nu0 + nu3 vanishes; caller should route through normalize_data first.
class DenominatorVanishes : public Error {
 public:
  explicit DenominatorVanishes(const std::string& what) : Error(what) {}
};

/// Curve handed to a constructor that requires a non-geodesic is a geodesic.
class GeodesicInput : public Error {
 public:
  explicit GeodesicInput(const std::string& what) : Error(what) {}
};

/// Gallery parameters violate their defining constraints.
class ParameterConstraint : public Error {
 public:
  explicit ParameterConstraint(const std::string& what) : Error(what) {}
};

/// Periodic data whose curvature functional falls outside the admissible class.
class NotAdmissible : public Error {
 public:
  explicit NotAdmissible(const std::string& what) : Error(what) {}
};

/// Evaluation at a masked singular point (zero of g_z, G_z, rho, ...).
class MaskedSingularity : public Error {
 public:
  explicit MaskedSingularity(const std::string& what) : Error(what) {}
};

/// Surface derivatives degenerate at this point ( psi_s, psi_t dependent).
class DegeneratePoint : public Error {
 public:
  explicit DegeneratePoint(const std::string& what) : Error(what) {}
};

/// Every grid point of a requested sample ended up masked.
class EmptyGrid : public Error {
 public:
  explicit EmptyGrid(const std::string& what) : Error(what) {}
};

/// File output failure, annotated with the path.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/// Malformed expression text. Carries the byte offset of the failure and
/// the set of token descriptions that would have been accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset,
              std::vector<std::string> expected)
      : Error(what + " at byte " + std::to_string(offset)),
        offset_(offset),
        expected_(std::move(expected)) {}
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Identifier that is neither the declared variable, a constant, nor a function.
class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(const std::string& name, std::size_t offset)
      : Error("unknown identifier '" + name + "' at byte " +
              std::to_string(offset)),
        name_(name),
        offset_(offset) {}
  const std::string& name() const { return name_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

/// Bad argument to a library entry point (wrong sizes, invalid ranges, ...).
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

}  // namespace cmc1
