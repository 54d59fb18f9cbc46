#include "satflow/exact.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace satflow {

namespace {

double sphere_area(int d) {
  switch (d) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    case 3:
      return 4.0 * std::numbers::pi;
    default:
      throw ExactError("Barenblatt profile supports dimensions 1 to 3");
  }
}

void validate(const BarenblattParams& p) {
  if (!(p.m > 1.0)) throw ExactError("Barenblatt exponent m must be greater than 1");
  if (!(p.mass > 0.0)) throw ExactError("Barenblatt mass must be positive");
  if (!(p.t0 > 0.0)) throw ExactError("Barenblatt time offset t0 must be positive");
  sphere_area(p.dimension);
}

}  // namespace

double Barenblatt::radial_mass(const BarenblattParams& params, double constant, int intervals) {
  const int d = params.dimension;
  const double q = 1.0 / (params.m - 1.0);
  const double beta = 1.0 / (d * (params.m - 1.0) + 2.0);
  const double kappa = beta * (params.m - 1.0) / (2.0 * params.m);
  const double radius = std::sqrt(constant / kappa);
  // r = R sin(phi): the integrand C^q cos^{2q+1}(phi) R^d sin^{d-1}(phi) is smooth on [0, pi/2].
  auto f = [&](double phi) {
    return std::pow(constant, q) * std::pow(std::cos(phi), 2.0 * q + 1.0) * std::pow(radius, d) *
           std::pow(std::sin(phi), d - 1);
  };
  const int n = intervals + intervals % 2;
  const double a = 0.0, b = 0.5 * std::numbers::pi;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return sphere_area(d) * sum * h / 3.0;
}

Barenblatt::Barenblatt(BarenblattParams params) : params_(params) {
  validate(params_);
  const int d = params_.dimension;
  const double m = params_.m;
  const double q = 1.0 / (m - 1.0);
  beta_ = 1.0 / (d * (m - 1.0) + 2.0);
  kappa_ = beta_ * (m - 1.0) / (2.0 * m);
  // int (C - kappa |z|^2)_+^q dz = C^{q + d/2} kappa^{-d/2} pi^{d/2} Gamma(q+1) / Gamma(q+1+d/2).
  const double half_d = 0.5 * d;
  const double shape = std::pow(std::numbers::pi / kappa_, half_d) * std::tgamma(q + 1.0) / std::tgamma(q + 1.0 + half_d);
  constant_ = std::pow(params_.mass / shape, 1.0 / (q + half_d));

  const double check = radial_mass(params_, constant_);
  if (std::abs(check - params_.mass) > 1e-6) {
    std::ostringstream msg;
    msg << "Barenblatt mass check failed: quadrature gives " << check << " for M = " << params_.mass;
    throw ExactError(msg.str());
  }
}

double Barenblatt::operator()(double t, const Point& x) const {
  const double s = t + params_.t0;
  const double inner = constant_ - kappa_ * x.squaredNorm() * std::pow(s, -2.0 * beta_);
  if (inner <= 0.0) return 0.0;
  return std::pow(s, -beta_ * params_.dimension) * std::pow(inner, 1.0 / (params_.m - 1.0));
}

double Barenblatt::support_radius(double t) const {
  return std::sqrt(constant_ / kappa_) * std::pow(t + params_.t0, beta_);
}

StateField initial_datum(const InitialCondition& init, const CellIndexSet& cells, double tau) {
  StateField field{Eigen::VectorXd(cells.size()), 0, tau};
  switch (init.kind) {
    case InitialCondition::Kind::Constant:
      field.values.setConstant(init.value);
      break;
    case InitialCondition::Kind::Barenblatt: {
      if (init.barenblatt.dimension != cells.dimension()) {
        throw ExactError("Barenblatt dimension does not match the grid");
      }
      const Barenblatt profile(init.barenblatt);
      for (int i = 0; i < cells.size(); ++i) field.values[i] = profile(0.0, cells.center(i));
      break;
    }
    case InitialCondition::Kind::Custom:
      if (!init.custom) throw ExactError("custom initial datum has no function");
      for (int i = 0; i < cells.size(); ++i) field.values[i] = init.custom(cells.center(i));
      break;
  }
  return field;
}

}  // namespace satflow
