#include "satflow/scheme.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace satflow {

std::string to_string(MidpointRule rule) {
  switch (rule) {
    case MidpointRule::Implicit:
      return "O1";
    case MidpointRule::Explicit:
      return "O2";
    case MidpointRule::Midpoint:
      return "O3";
  }
  return "O3";
}

MidpointRule parse_midpoint_rule(const std::string& name) {
  if (name == "O1" || name == "implicit") return MidpointRule::Implicit;
  if (name == "O2" || name == "explicit") return MidpointRule::Explicit;
  if (name == "O3" || name == "midpoint") return MidpointRule::Midpoint;
  throw SchemeError("unknown midpoint rule '" + name + "' (expected O1, O2 or O3)");
}

void SchemeOptions::validate() const {
  if (!(newton_tol > 0.0)) throw SchemeError("newton_tol must be positive");
  if (newton_max_iters < 1 || picard_max_iters < 1) throw SchemeError("iteration caps must be at least 1");
  if (max_halvings < 0) throw SchemeError("max_halvings must be non-negative");
}

ImplicitStepper::ImplicitStepper(const Model& model, const Discretization& disc, SchemeOptions options)
    : model_(model), disc_(disc), options_(options), colors_(distance2_coloring(disc.cells.adjacency())) {
  options_.validate();
}

Eigen::VectorXd ImplicitStepper::full_residual(const Eigen::VectorXd& p_next, const Eigen::VectorXd& p_prev,
                                               double tau) const {
  return residual<double>(p_next, p_prev, tau, model_, disc_, options_.midpoint);
}

bool ImplicitStepper::admissible_iterate(const Eigen::VectorXd& p) const {
  const double alpha = model_.mobility.alpha();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) return false;
    if (model_.entropy.singular_at_zero && !(p[i] > 0.0)) return false;
    if (model_.entropy.singular_at_alpha && !(p[i] < alpha)) return false;
  }
  return true;
}

Eigen::VectorXd ImplicitStepper::newton(const Eigen::VectorXd& guess, const Eigen::VectorXd& p_prev, double tau,
                                        const Eigen::VectorXd* lagged_mid, SolveReport& report) const {
  const MidpointRule rule = options_.midpoint;
  auto eval_residual = [&](const Eigen::VectorXd& p) {
    return residual<double>(p, p_prev, tau, model_, disc_, rule, lagged_mid);
  };
  const ResidualFn dual_residual = [&](const DualVec& p) {
    return residual<Dual>(p, p_prev, tau, model_, disc_, rule, lagged_mid);
  };

  const double alpha = model_.mobility.alpha();
  Eigen::VectorXd p = guess;
  Eigen::VectorXd g = eval_residual(p);
  double norm = g.lpNorm<Eigen::Infinity>();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;

  for (int it = 0; it < options_.newton_max_iters; ++it) {
    if (it > 0 && norm <= options_.newton_tol) return p;
    if ((p.array() < 0.0).any() || (p.array() > alpha).any()) ++report.clamped_iterates;

    const Eigen::SparseMatrix<double> jac = colored_jacobian(dual_residual, p, disc_.cells.adjacency(), colors_);
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) throw SolverError("Newton Jacobian is singular", norm);
    const Eigen::VectorXd delta = lu.solve(-g);
    ++report.newton_iterations;

    double scale = 1.0;
    Eigen::VectorXd trial = p + delta;
    int halvings = 0;
    while (!admissible_iterate(trial)) {
      if (halvings == options_.max_halvings) {
        throw SolverError("Newton increment leaves the entropy domain after " + std::to_string(halvings) +
                              " halvings",
                          norm);
      }
      scale *= 0.5;
      trial = p + scale * delta;
      ++halvings;
    }
    report.halvings += halvings;
    p = trial;
    g = eval_residual(p);
    norm = g.lpNorm<Eigen::Infinity>();
  }
  if (norm <= options_.newton_tol) return p;
  std::ostringstream msg;
  msg << "Newton did not converge in " << options_.newton_max_iters << " iterations (residual " << norm << ")";
  throw SolverError(msg.str(), norm);
}

StepResult ImplicitStepper::step(const StateField& prev, double tau) const {
  if (!(tau > 0.0)) throw SchemeError("time step must be positive");
  if (prev.values.size() != disc_.size()) throw SchemeError("state size does not match the grid");
  const auto start = std::chrono::steady_clock::now();

  SolveReport report;
  const Eigen::VectorXd& p_prev = prev.values;
  Eigen::VectorXd p_next;

  const bool local = !disc_.has_kernel() || options_.midpoint == MidpointRule::Explicit;
  if (local) {
    p_next = newton(p_prev, p_prev, tau, nullptr, report);
  } else {
    Eigen::VectorXd iterate = p_prev;
    bool converged = false;
    double full_norm = std::numeric_limits<double>::infinity();
    for (int k = 0; k < options_.picard_max_iters; ++k) {
      const Eigen::VectorXd mid =
          options_.midpoint == MidpointRule::Implicit ? iterate : Eigen::VectorXd(0.5 * (iterate + p_prev));
      Eigen::VectorXd next = newton(iterate, p_prev, tau, &mid, report);
      ++report.picard_iterations;
      const double change = (next - iterate).lpNorm<Eigen::Infinity>();
      iterate = std::move(next);
      full_norm = full_residual(iterate, p_prev, tau).lpNorm<Eigen::Infinity>();
      if (!std::isfinite(change)) break;
      if (change <= options_.newton_tol && full_norm <= options_.newton_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "Picard iteration did not converge in " << options_.picard_max_iters << " iterations (residual "
          << full_norm << ")";
      throw SolverError(msg.str(), full_norm);
    }
    p_next = std::move(iterate);
  }

  report.residual_norm = full_residual(p_next, p_prev, tau).lpNorm<Eigen::Infinity>();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {StateField{std::move(p_next), prev.time_index + 1, tau}, report};
}

StepResult step(const StateField& prev, const Model& model, const Discretization& disc,
                const SchemeOptions& options) {
  return ImplicitStepper(model, disc, options).step(prev, prev.tau);
}

}  // namespace satflow
