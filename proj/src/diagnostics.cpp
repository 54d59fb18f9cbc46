#include "satflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace satflow {

double mass(const Eigen::VectorXd& p, const Discretization& disc) { return disc.cell_volume() * p.sum(); }

double free_energy(const Eigen::VectorXd& p, const Model& model, const Discretization& disc) {
  const double q = disc.cell_volume();
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double u = eval(model.entropy.U, p[i]);
    if (!std::isfinite(u)) {
      throw DiagnosticsError("entropy is infinite at cell " + std::to_string(i) + " (P = " + std::to_string(p[i]) +
                             ")");
    }
    entropy += u;
  }
  double energy = q * entropy + q * disc.V.dot(p);
  if (disc.has_kernel()) energy += 0.5 * q * q * p.dot(disc.K * p);
  return energy;
}

DissipationCheck dissipation_check(const Eigen::VectorXd& prev, const Eigen::VectorXd& next,
                                   const FaceData<double>& faces, const Model& model, const Discretization& disc,
                                   double tau, MidpointRule rule, double tol) {
  DissipationCheck check;
  check.lhs = tau * disc.cell_volume() * (faces.theta.array() * faces.velocity.array().square()).sum();
  check.drop = free_energy(prev, model, disc) - free_energy(next, model, disc);
  check.ok = check.lhs <= check.drop + tol;
  check.equality_expected = model.entropy.is_zero && rule == MidpointRule::Midpoint;
  if (check.equality_expected) check.equality_ok = std::abs(check.lhs - check.drop) <= tol;
  return check;
}

EnvelopeParams envelope_params(const Model& model, const Discretization& disc, const Eigen::VectorXd& initial,
                               double tau) {
  const Potentials& pot = model.potentials;
  EnvelopeParams env;
  env.dimension = disc.cells.dimension();
  env.tau = tau;
  env.alpha = model.mobility.alpha();
  env.lipschitz = model.mobility.lipschitz().value_or(0.0);
  const double l1 = disc.cell_volume() * initial.cwiseAbs().sum();
  env.lambda = pot.hessian_bound_v.value_or(0.0) + (pot.has_kernel() ? pot.hessian_bound_k.value_or(0.0) * l1 : 0.0);
  env.hypotheses_hold = pot.vanishing_boundary_gradient && model.mobility.lipschitz().has_value() &&
                        pot.hessian_bound_v.has_value() && (!pot.has_kernel() || pot.hessian_bound_k.has_value());
  return env;
}

EnvelopeResult extrema_envelope(std::span<const Eigen::VectorXd> history, const EnvelopeParams& env, double slack) {
  EnvelopeResult result;
  if (history.empty()) return result;
  const double rate = 1.0 / (1.0 + 2.0 * env.lambda * env.tau * env.dimension * env.lipschitz);
  const double min0 = history.front().minCoeff();
  const double gap0 = env.alpha - history.front().maxCoeff();
  double factor = 1.0;
  for (std::size_t n = 0; n < history.size(); ++n) {
    const bool lower_ok = history[n].minCoeff() >= factor * min0 - slack;
    const bool upper_ok = !std::isfinite(env.alpha) || env.alpha - history[n].maxCoeff() >= factor * gap0 - slack;
    if (!(lower_ok && upper_ok)) {
      result.first_violation = static_cast<int>(n);
      break;
    }
    factor *= rate;
  }
  if (!env.hypotheses_hold) {
    result.status = EnvelopeStatus::NotAsserted;
  } else {
    result.status = result.first_violation ? EnvelopeStatus::Violated : EnvelopeStatus::Holds;
  }
  return result;
}

double h1_seminorm(const Eigen::VectorXd& values, const CellIndexSet& cells) {
  double sum = 0.0;
  for (const Face& f : cells.faces()) {
    const double diff = (values[f.upper] - values[f.lower]) / cells.spacing(f.axis);
    sum += diff * diff;
  }
  return std::sqrt(cells.cell_volume() * sum);
}

double wm11_upper_bound(const Eigen::VectorXd& p, const CellIndexSet& cells) {
  const int n = cells.size();
  const int d = cells.dimension();
  if (p.size() != n) throw DiagnosticsError("vector does not match the grid");

  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int k = 0; k < d; ++k) {
      const double w = 1.0 / (cells.spacing(k) * cells.spacing(k));
      diag += 2.0 * w;
      if (int j = cells.upper_neighbor(i, k); j >= 0) triplets.emplace_back(i, j, -w);
      if (int j = cells.lower_neighbor(i, k); j >= 0) triplets.emplace_back(i, j, -w);
    }
    triplets.emplace_back(i, i, diag);
  }
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
  if (solver.info() != Eigen::Success) throw DiagnosticsError("discrete Laplacian with zero exterior is singular");
  const Eigen::VectorXd u = solver.solve(p);

  // F = -(U_{i+e} - U_i) / h on every face touching an admissible cell, with U = 0 outside.
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const double h = cells.spacing(k);
      const int up = cells.upper_neighbor(i, k);
      total += std::abs((up >= 0 ? u[up] : 0.0) - u[i]) / h;
      if (cells.lower_neighbor(i, k) < 0) total += std::abs(u[i]) / h;
    }
  }
  return cells.cell_volume() * total;
}

double wm11_exact_1d(const Eigen::VectorXd& p, const CellIndexSet& cells) {
  if (cells.dimension() != 1) throw DiagnosticsError("exact W^{-1,1} evaluation is only available in one dimension");
  if (p.size() != cells.size()) throw DiagnosticsError("vector does not match the grid");
  const double h = cells.spacing(0);

  double total = 0.0;
  int start = 0;
  while (start < cells.size()) {
    int end = start;
    while (cells.upper_neighbor(end, 0) >= 0) ++end;
    // Fluxes on the faces of the run are c + h S_j with S_j the partial sums, j = 0..L.
    std::vector<double> w{0.0};
    for (int i = start; i <= end; ++i) w.push_back(w.back() + h * p[i]);
    std::vector<double> sorted = w;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double c = -sorted[sorted.size() / 2];
    for (double wj : w) total += std::abs(c + wj);
    start = end + 1;
  }
  return cells.cell_volume() * total;
}

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double diff = left + right - whole;
  if (!std::isfinite(diff)) throw DiagnosticsError("Lambda_U quadrature diverges");
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double lambda_function(double s, const Model& model) {
  if (model.lambda_closed_form) return model.lambda_closed_form(s);
  if (!model.entropy.ddU) throw DiagnosticsError("Lambda_U needs U''");
  const double alpha = model.mobility.alpha();
  if (!(s > 0.0) || !(s < alpha)) {
    std::ostringstream msg;
    msg << "Lambda_U quadrature requires densities in (0, alpha); got " << s;
    throw DiagnosticsError(msg.str());
  }
  const double anchor = model.lambda_anchor();
  if (s == anchor) return 0.0;
  // Lambda(s) = int_anchor^s (s - r) U''(r) / m(r) dr.
  const std::function<double(double)> f = [&](double r) {
    return (s - r) * model.entropy.ddU(r) / model.mobility(r);
  };
  const double fa = f(anchor);
  const double fb = f(s);
  const double fm = f(0.5 * (anchor + s));
  return adaptive_simpson(f, anchor, s, fa, fm, fb, simpson(anchor, s, fa, fm, fb), 1e-13, 40);
}

double lambda_entropy(const Eigen::VectorXd& p, const Model& model, const Discretization& disc) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) sum += lambda_function(p[i], model);
  return disc.cell_volume() * sum;
}

namespace {

void fill_level(DiagnosticsRecord& r, const StateField& level, const Model& model, const Discretization& disc,
                bool with_lambda_entropy) {
  const Eigen::VectorXd& p = level.values;
  r.step = level.time_index;
  r.time = level.time();
  r.mass = mass(p, disc);
  r.free_energy = free_energy(p, model, disc);
  r.min_density = p.minCoeff();
  r.max_density = p.maxCoeff();
  Eigen::VectorXd du(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) du[i] = eval(model.entropy.dU, p[i]);
  r.h1_seminorm_dU = h1_seminorm(du, disc.cells);
  if (with_lambda_entropy) r.lambda_entropy = lambda_entropy(p, model, disc);
}

}  // namespace

DiagnosticsRecord record_initial(const StateField& initial, const Model& model, const Discretization& disc,
                                 bool with_lambda_entropy) {
  DiagnosticsRecord r;
  fill_level(r, initial, model, disc, with_lambda_entropy);
  return r;
}

DiagnosticsRecord record_step(const StateField& prev, const StateField& next, const SolveReport& report,
                              const Model& model, const Discretization& disc, MidpointRule rule,
                              bool with_lambda_entropy) {
  DiagnosticsRecord r;
  fill_level(r, next, model, disc, with_lambda_entropy);
  const FaceData<double> faces = assemble_faces<double>(next.values, prev.values, model, disc, rule);
  const DissipationCheck check = dissipation_check(prev.values, next.values, faces, model, disc, next.tau, rule);
  r.dissipation_lhs = check.lhs;
  r.energy_drop = check.drop;
  r.newton_iterations = report.newton_iterations;
  r.picard_iterations = report.picard_iterations;
  r.residual_norm = report.residual_norm;
  return r;
}

}  // namespace satflow
