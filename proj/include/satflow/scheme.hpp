#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "satflow/dual.hpp"
#include "satflow/jacobian.hpp"
#include "satflow/model.hpp"

namespace satflow {

/// Time level at which the interaction term K * P is evaluated inside xi.
enum class MidpointRule {
  Implicit,  // O1: P^{n+1}, energy-stable for positive semi-definite K
  Explicit,  // O2: P^n, energy-stable for negative semi-definite K
  Midpoint,  // O3: (P^{n+1} + P^n) / 2, energy-stable for any symmetric K
};

std::string to_string(MidpointRule rule);
MidpointRule parse_midpoint_rule(const std::string& name);

class SchemeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the nonlinear solve fails; carries the last residual sup-norm.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual_norm)
      : std::runtime_error(what), residual_norm_(residual_norm) {}
  double residual_norm() const { return residual_norm_; }

 private:
  double residual_norm_;
};

/// Densities on the admissible cells at time level `time_index`.
struct StateField {
  Eigen::VectorXd values;
  int time_index = 0;
  double tau = 0.0;

  double time() const { return time_index * tau; }
};

struct SchemeOptions {
  MidpointRule midpoint = MidpointRule::Midpoint;
  double newton_tol = 1e-10;
  int newton_max_iters = 50;
  int picard_max_iters = 500;
  int max_halvings = 30;

  void validate() const;
};

template <typename Scalar>
struct FaceData {
  Vec<Scalar> velocity;
  Vec<Scalar> flux;
  Vec<Scalar> theta;
};

namespace detail {

template <typename Scalar>
Vec<Scalar> kernel_apply(const Eigen::MatrixXd& K, const Vec<Scalar>& p) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return K * p;
  } else {
    const Eigen::Index n = p.size();
    Vec<Scalar> out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar acc{0.0};
      for (Eigen::Index j = 0; j < n; ++j) {
        acc.val += K(i, j) * p[j].val;
        acc.der += K(i, j) * p[j].der;
      }
      out[i] = acc;
    }
    return out;
  }
}

}  // namespace detail

/// xi_i = U'(P_i) + V_i + |Q| sum_j K_ij P^{mid}_j.
///
/// When `lagged_mid` is given it replaces P^{mid} (Picard lagging of the nonlocal term).
template <typename Scalar>
Vec<Scalar> assemble_xi(const Vec<Scalar>& p_next, const Eigen::VectorXd& p_prev, const Model& model,
                        const Discretization& disc, MidpointRule rule,
                        const Eigen::VectorXd* lagged_mid = nullptr) {
  const Eigen::Index n = p_next.size();
  if (n != disc.size() || p_prev.size() != n) throw SchemeError("state size does not match the grid");
  Vec<Scalar> xi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      xi[i] = eval(model.entropy.dU, p_next[i]) + disc.V[i];
    } catch (const DualDomainError& e) {
      throw SchemeError("entropy derivative undefined at cell " + std::to_string(i) + " (P = " +
                        std::to_string(value_of(p_next[i])) + "): " + e.what());
    }
  }
  if (!disc.has_kernel()) return xi;

  const double q = disc.cell_volume();
  if (lagged_mid != nullptr) {
    xi += (q * (disc.K * *lagged_mid)).template cast<Scalar>();
  } else if (rule == MidpointRule::Explicit) {
    xi += (q * (disc.K * p_prev)).template cast<Scalar>();
  } else if (rule == MidpointRule::Implicit) {
    xi += q * detail::kernel_apply<Scalar>(disc.K, p_next);
  } else {
    const Vec<Scalar> mid = (p_next + p_prev.template cast<Scalar>()) * Scalar{0.5};
    xi += q * detail::kernel_apply<Scalar>(disc.K, mid);
  }
  return xi;
}

/// v = -(xi_{i+e_k} - xi_i) / h_k on each interior face, in CellIndexSet face order.
template <typename Scalar>
Vec<Scalar> face_velocity(const Vec<Scalar>& xi, const CellIndexSet& cells) {
  const auto& faces = cells.faces();
  Vec<Scalar> v(static_cast<Eigen::Index>(faces.size()));
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    v[f] = -(xi[face.upper] - xi[face.lower]) / cells.spacing(face.axis);
  }
  return v;
}

/// Upwind flux F = m_w(P_i, P_{i+e}) v_+ + m_w(P_{i+e}, P_i) v_-, with theta such that F = theta v.
template <typename Scalar>
FaceData<Scalar> face_flux(const Vec<Scalar>& p_next, const Vec<Scalar>& velocity, const Mobility& mobility,
                           const CellIndexSet& cells) {
  const auto& faces = cells.faces();
  const auto nf = static_cast<Eigen::Index>(faces.size());
  FaceData<Scalar> data{velocity, Vec<Scalar>(nf), Vec<Scalar>(nf)};
  for (Eigen::Index f = 0; f < nf; ++f) {
    const Scalar& a = p_next[faces[f].lower];
    const Scalar& b = p_next[faces[f].upper];
    const Scalar& v = velocity[f];
    if (value_of(v) > 0.0) {
      const Scalar mw = mobility.upwind(a, b);
      data.theta[f] = mw;
      data.flux[f] = mw * pos_part(v);
    } else if (value_of(v) < 0.0) {
      const Scalar mw = mobility.upwind(b, a);
      data.theta[f] = mw;
      data.flux[f] = mw * neg_part(v);
    } else {
      data.theta[f] = Scalar{0.0};
      data.flux[f] = Scalar{0.0};
    }
  }
  return data;
}

/// Faces, velocities and fluxes of one implicit step.
template <typename Scalar>
FaceData<Scalar> assemble_faces(const Vec<Scalar>& p_next, const Eigen::VectorXd& p_prev, const Model& model,
                                const Discretization& disc, MidpointRule rule,
                                const Eigen::VectorXd* lagged_mid = nullptr) {
  const Vec<Scalar> xi = assemble_xi<Scalar>(p_next, p_prev, model, disc, rule, lagged_mid);
  const Vec<Scalar> v = face_velocity<Scalar>(xi, disc.cells);
  return face_flux<Scalar>(p_next, v, model.mobility, disc.cells);
}

/// G_i = (P_i^{next} - P_i^{prev}) / tau + sum_k (F_{i+e_k/2} - F_{i-e_k/2}) / h_k.
template <typename Scalar>
Vec<Scalar> residual(const Vec<Scalar>& p_next, const Eigen::VectorXd& p_prev, double tau, const Model& model,
                     const Discretization& disc, MidpointRule rule, const Eigen::VectorXd* lagged_mid = nullptr) {
  const FaceData<Scalar> faces = assemble_faces<Scalar>(p_next, p_prev, model, disc, rule, lagged_mid);
  Vec<Scalar> g = (p_next - p_prev.template cast<Scalar>()) / Scalar{tau};
  const auto& list = disc.cells.faces();
  for (std::size_t f = 0; f < list.size(); ++f) {
    const Scalar div = faces.flux[static_cast<Eigen::Index>(f)] / disc.cells.spacing(list[f].axis);
    g[list[f].lower] += div;
    g[list[f].upper] -= div;
  }
  return g;
}

struct SolveReport {
  int newton_iterations = 0;
  int picard_iterations = 0;
  int halvings = 0;
  int clamped_iterates = 0;
  double residual_norm = 0.0;
  double wall_seconds = 0.0;
};

struct StepResult {
  StateField next;
  SolveReport report;
};

/// Backward-Euler stepper for the finite-volume scheme.
///
/// With K = 0, or with the explicit interaction rule, every step is one Newton solve
/// with a stencil-sparse dual-number Jacobian. Otherwise an outer Picard loop lags the
/// nonlocal term inside xi and solves the resulting local system by Newton; it stops
/// when successive iterates differ by at most newton_tol and the full residual is
/// below newton_tol.
class ImplicitStepper {
 public:
  ImplicitStepper(const Model& model, const Discretization& disc, SchemeOptions options);

  StepResult step(const StateField& prev, double tau) const;

  /// Full residual (no lagging) at a candidate next state.
  Eigen::VectorXd full_residual(const Eigen::VectorXd& p_next, const Eigen::VectorXd& p_prev, double tau) const;

  const SchemeOptions& options() const { return options_; }

 private:
  Eigen::VectorXd newton(const Eigen::VectorXd& guess, const Eigen::VectorXd& p_prev, double tau,
                         const Eigen::VectorXd* lagged_mid, SolveReport& report) const;
  bool admissible_iterate(const Eigen::VectorXd& p) const;

  const Model& model_;
  const Discretization& disc_;
  SchemeOptions options_;
  std::vector<int> colors_;
};

/// One implicit step from `prev` with step size prev.tau.
StepResult step(const StateField& prev, const Model& model, const Discretization& disc,
                const SchemeOptions& options);

}  // namespace satflow
