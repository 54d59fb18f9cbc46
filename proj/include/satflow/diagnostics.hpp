#pragma once

#include <optional>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

#include "satflow/grid.hpp"
#include "satflow/model.hpp"
#include "satflow/scheme.hpp"

namespace satflow {

class DiagnosticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-step diagnostics; one CSV row each.
struct DiagnosticsRecord {
  int step = 0;
  double time = 0.0;
  double mass = 0.0;
  double free_energy = 0.0;
  double dissipation_lhs = 0.0;
  double energy_drop = 0.0;
  double min_density = 0.0;
  double max_density = 0.0;
  double h1_seminorm_dU = 0.0;
  std::optional<double> lambda_entropy;
  int newton_iterations = 0;
  int picard_iterations = 0;
  double residual_norm = 0.0;
};

/// |Q| sum_i P_i.
double mass(const Eigen::VectorXd& p, const Discretization& disc);

/// E_h = |Q| sum U(P_i) + |Q| sum V_i P_i + 1/2 |Q|^2 sum_ij P_i K_ij P_j.
double free_energy(const Eigen::VectorXd& p, const Model& model, const Discretization& disc);

struct DissipationCheck {
  double lhs = 0.0;   // tau |Q| sum_faces theta |v|^2
  double drop = 0.0;  // E_h(prev) - E_h(next)
  bool ok = false;    // lhs <= drop + tol
  bool equality_expected = false;
  bool equality_ok = true;  // |lhs - drop| <= tol when U = 0 and the midpoint rule is used
};

DissipationCheck dissipation_check(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                                   const FaceData<double>& faces, const Model& model, const Discretization& disc,
                                   double tau, MidpointRule rule, double tol = 1e-8);

/// Inputs of the discrete extrema envelopes.
struct EnvelopeParams {
  double lambda = 0.0;     // ||D^2 V|| + ||D^2_x K|| ||rho_0||_{L^1}
  double lipschitz = 0.0;  // ||m'||
  int dimension = 1;
  double tau = 0.0;
  double alpha = 1.0;
  /// Lipschitz mobility, W^{2,inf} potentials with vanishing boundary gradients.
  bool hypotheses_hold = false;
};

/// Builds envelope parameters from the model metadata; `hypotheses_hold` is false when
/// any of the required bounds or boundary conditions is missing.
EnvelopeParams envelope_params(const Model& model, const Discretization& disc, const Eigen::VectorXd& initial,
                               double tau);

enum class EnvelopeStatus { Holds, Violated, NotAsserted };

struct EnvelopeResult {
  EnvelopeStatus status = EnvelopeStatus::NotAsserted;
  /// First time level where an envelope fails, computed even when not asserted.
  std::optional<int> first_violation;
};

/// min P^n >= (1 + 2 lambda tau d L)^{-n} min P^0 and
/// alpha - max P^n >= (1 + 2 lambda tau d L)^{-n} (alpha - max P^0), with `slack`.
EnvelopeResult extrema_envelope(std::span<const Eigen::VectorXd> history, const EnvelopeParams& env,
                                double slack = 1e-8);

/// [P]_{H^1_h} = sqrt(|Q| sum_k sum_{interior faces} |(P_{i+e_k} - P_i) / h_k|^2).
double h1_seminorm(const Eigen::VectorXd& values, const CellIndexSet& cells);

/// Discrete W^{-1,1} norm bounded from above by the flux of the discrete Poisson
/// solution with zero exterior values.
double wm11_upper_bound(const Eigen::VectorXd& p, const CellIndexSet& cells);

/// Exact discrete W^{-1,1} norm in one dimension (weighted median over the free flux constant
/// of each connected run of cells).
double wm11_exact_1d(const Eigen::VectorXd& p, const CellIndexSet& cells);

/// Lambda_U(s) with Lambda'' = U''/m and Lambda = Lambda' = 0 at the anchor.
/// Uses the model's closed form when present, adaptive Simpson quadrature otherwise.
double lambda_function(double s, const Model& model);

/// |Q| sum_i Lambda_U(P_i).
double lambda_entropy(const Eigen::VectorXd& p, const Model& model, const Discretization& disc);

/// Diagnostics of an accepted step prev -> next.
DiagnosticsRecord record_step(const StateField& prev, const StateField& next, const SolveReport& report,
                              const Model& model, const Discretization& disc, MidpointRule rule,
                              bool with_lambda_entropy);

/// Diagnostics of the initial level (no dissipation, no solve).
DiagnosticsRecord record_initial(const StateField& initial, const Model& model, const Discretization& disc,
                                 bool with_lambda_entropy);

}  // namespace satflow
