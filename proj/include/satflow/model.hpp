#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "satflow/dual.hpp"
#include "satflow/grid.hpp"

namespace satflow {

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using ScalarFn = std::function<Dual(const Dual&)>;
using RealFn = std::function<double(double)>;

inline constexpr double kNoSaturation = std::numeric_limits<double>::infinity();

/// Evaluates a dual-valued scalar function at a plain double or a dual.
inline double eval(const ScalarFn& f, double x) { return f(Dual{x}).val; }
inline Dual eval(const ScalarFn& f, const Dual& x) { return f(x); }

/// m = m_up * m_down on [0, alpha] with m_up non-decreasing, m_down non-increasing,
/// m_up(0) = 0 and m_down(alpha) = 0.
class Mobility {
 public:
  Mobility(double alpha, ScalarFn up, ScalarFn down, std::optional<double> lipschitz = std::nullopt,
           std::string kind = "custom");

  const std::string& kind() const { return kind_; }

  double alpha() const { return alpha_; }
  bool saturating() const { return alpha_ < kNoSaturation; }
  std::optional<double> lipschitz() const { return lipschitz_; }

  template <typename Scalar>
  Scalar up(const Scalar& s) const {
    return eval(up_, clamp(s, 0.0, alpha_));
  }
  template <typename Scalar>
  Scalar down(const Scalar& s) const {
    return eval(down_, clamp(s, 0.0, alpha_));
  }
  /// m(s) = m_w(s, s).
  template <typename Scalar>
  Scalar operator()(const Scalar& s) const {
    return upwind(s, s);
  }
  /// Upwind mobility m_w(a, b) = m_up(a) m_down(b); arguments are clamped into [0, alpha].
  template <typename Scalar>
  Scalar upwind(const Scalar& a, const Scalar& b) const {
    return up(a) * down(b);
  }

  /// m(rho) = rho.
  static Mobility linear();
  /// m(rho) = rho (alpha - rho) with closed-form monotone factors.
  static Mobility saturation(double alpha = 1.0);

 private:
  double alpha_;
  ScalarFn up_;
  ScalarFn down_;
  std::optional<double> lipschitz_;
  std::string kind_;
};

/// Builds monotone factors of a user mobility from the log-derivative split
/// m_up = exp(int_{alpha/2}^s (m')_+ / m), m_down = m(alpha/2) exp(int_{alpha/2}^s (m')_- / m).
///
/// The integrals are tabulated on a uniform grid of (0, alpha) with spacing at most
/// `quadrature_step`; on each subinterval the increment of log m is assigned to the
/// factor matching its sign, so the product reproduces m exactly at the nodes.
/// With alpha = +inf the mobility must already be non-decreasing: m_up = m, m_down = 1.
Mobility decompose_mobility(const RealFn& m, const RealFn& dm, double alpha, double quadrature_step);

/// Convex entropy U with derivative U' and optional U''.
struct Entropy {
  std::string name;
  double parameter = 0.0;  // exponent m for "power", coefficient c for "quadratic"
  ScalarFn U;
  ScalarFn dU;
  RealFn ddU;
  bool singular_at_zero = false;
  bool singular_at_alpha = false;
  bool is_zero = false;

  static Entropy zero();
  /// U = c rho^2.
  static Entropy quadratic(double coefficient = 1.0);
  /// U = rho^m / (m - 1), m > 0, m != 1. Singular at 0 when m < 2 is non-integer or m < 1.
  static Entropy power(double m);
  /// U = rho log rho.
  static Entropy boltzmann();
};

using PotentialFn = std::function<double(const Point&)>;
using KernelFn = std::function<double(const Point&, const Point&)>;

/// Confinement V and symmetric interaction kernel K, with optional Hessian bounds.
struct Potentials {
  std::string v_name = "zero";
  std::string k_name = "zero";
  PotentialFn V;  // empty means V = 0
  KernelFn K;     // empty means K = 0
  std::optional<double> hessian_bound_v;
  std::optional<double> hessian_bound_k;
  /// V and grad V (and K, grad_x K) vanish on the domain boundary.
  bool vanishing_boundary_gradient = false;

  bool has_kernel() const { return static_cast<bool>(K); }

  static Potentials zero();
  /// V(x) = a |x|^2.
  static Potentials quadratic(double a);
  /// V(x) = c x_1.
  static Potentials linear(double c);
  /// V(x) = A prod_k (1 - x_k^2 / R^2)^2 on the box (-R, R)^d: W^{2,inf} with V = grad V = 0 on the boundary.
  static Potentials bump(double amplitude, double radius);

  Potentials with_gaussian_kernel(double amplitude, double width) const;
  Potentials with_quadratic_kernel(double amplitude) const;
};

struct Model {
  std::string name;
  Mobility mobility;
  Entropy entropy;
  Potentials potentials;
  /// Closed form of Lambda_U (Lambda'' = U''/m, Lambda = Lambda' = 0 at the anchor) when known.
  RealFn lambda_closed_form;

  /// alpha/2 when saturating, otherwise 1.
  double lambda_anchor() const { return mobility.saturating() ? 0.5 * mobility.alpha() : 1.0; }
};

/// Grid samplings V_i = V(x_i), K_ij = K(x_i, x_j) on an index set.
struct Discretization {
  CellIndexSet cells;
  Eigen::VectorXd V;
  Eigen::MatrixXd K;  // 0x0 when there is no kernel
  bool has_kernel() const { return K.size() > 0; }
  int size() const { return cells.size(); }
  double cell_volume() const { return cells.cell_volume(); }
};

/// Samples V and K at cell centers. Throws when the kernel sample is not symmetric.
Discretization sample_potentials(const Potentials& pot, CellIndexSet cells);

/// Bundles the components and attaches the closed-form Lambda_U when one is known.
Model make_model(std::string name, Mobility mobility, Entropy entropy, Potentials potentials);

namespace presets {

/// Porous-medium: m(rho) = rho, U = rho^m / (m - 1), V = K = 0.
Model porous_medium(double m = 2.0);
/// m(rho) = rho (1 - rho), U = rho^2, V = a |x|^2.
Model saturation_drift_diffusion(double confinement = 0.5);
/// Saturation drift-diffusion with attractive kernel K = -exp(-|x - y|^2 / 2).
Model aggregation(double confinement = 0.5, double kernel_amplitude = -1.0);

}  // namespace presets

}  // namespace satflow
