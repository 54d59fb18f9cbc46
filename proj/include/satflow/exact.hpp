#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "satflow/grid.hpp"
#include "satflow/scheme.hpp"

namespace satflow {

class ExactError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BarenblattParams {
  double m = 2.0;     // exponent > 1
  double mass = 2.0;  // M > 0
  double t0 = 1.0;    // time offset > 0
  int dimension = 1;
};

/// Self-similar solution of d_t u = Laplace(u^m) with mass M:
/// B(s, x) = s^{-beta d} (C - kappa |x|^2 s^{-2 beta})_+^{1/(m-1)}, beta = 1/(d(m-1)+2),
/// kappa = beta (m-1) / (2m). Evaluated at s = t + t0, so t = 0 gives B(t0, .).
class Barenblatt {
 public:
  explicit Barenblatt(BarenblattParams params);

  double operator()(double t, const Point& x) const;
  /// Radius of the support at time t (shifted by t0).
  double support_radius(double t) const;

  const BarenblattParams& params() const { return params_; }
  double beta() const { return beta_; }
  double kappa() const { return kappa_; }
  double constant() const { return constant_; }

  /// Mass of the profile with constant C, by radial quadrature.
  static double radial_mass(const BarenblattParams& params, double constant, int intervals = 20000);

 private:
  BarenblattParams params_;
  double beta_;
  double kappa_;
  double constant_;
};

struct InitialCondition {
  enum class Kind { Constant, Barenblatt, Custom };
  Kind kind = Kind::Constant;
  double value = 0.0;
  BarenblattParams barenblatt;
  std::function<double(const Point&)> custom;

  static InitialCondition constant(double v) { return {Kind::Constant, v, {}, {}}; }
  static InitialCondition from_barenblatt(BarenblattParams p) { return {Kind::Barenblatt, 0.0, p, {}}; }
  static InitialCondition from_function(std::function<double(const Point&)> f) {
    return {Kind::Custom, 0.0, {}, std::move(f)};
  }
};

/// Samples the initial density at cell centers.
StateField initial_datum(const InitialCondition& init, const CellIndexSet& cells, double tau);

}  // namespace satflow
