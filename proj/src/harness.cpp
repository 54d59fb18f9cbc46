#include "satflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <sstream>

#include "satflow/io.hpp"

namespace satflow {

namespace {

Point to_point(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

/// Integer ratio a / b when it is one (to 1e-9 relative), otherwise nullopt.
std::optional<long> integer_ratio(double a, double b) {
  const double r = a / b;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9 * n) return std::nullopt;
  return static_cast<long>(n);
}

}  // namespace

// ---------------------------------------------------------------------------
// Specs

DomainShape DomainSpec::build() const {
  if (name == "interval") {
    if (lower.size() != 1 || upper.size() != 1) throw HarnessError("interval needs one lower and one upper bound");
    return DomainShape::interval(lower[0], upper[0]);
  }
  if (name == "box") {
    if (lower.empty() || lower.size() != upper.size()) throw HarnessError("box bounds must have equal, nonzero length");
    return DomainShape::box(to_point(lower), to_point(upper));
  }
  if (name == "ball") {
    if (center.empty()) throw HarnessError("ball needs a center");
    return DomainShape::ball(to_point(center), radius);
  }
  if (name == "peanut") return DomainShape::peanut(peanut_a, peanut_r);
  throw HarnessError("unknown domain '" + name + "' (expected interval, box, ball or peanut)");
}

int DomainSpec::dimension() const { return build().dimension(); }

DomainSpec DomainSpec::interval(double a, double b) {
  DomainSpec s;
  s.name = "interval";
  s.lower = {a};
  s.upper = {b};
  return s;
}

DomainSpec DomainSpec::box(std::vector<double> lo, std::vector<double> hi) {
  DomainSpec s;
  s.name = "box";
  s.lower = std::move(lo);
  s.upper = std::move(hi);
  return s;
}

DomainSpec DomainSpec::ball(std::vector<double> c, double r) {
  DomainSpec s;
  s.name = "ball";
  s.center = std::move(c);
  s.radius = r;
  return s;
}

DomainSpec DomainSpec::peanut(double a, double r) {
  DomainSpec s;
  s.name = "peanut";
  s.peanut_a = a;
  s.peanut_r = r;
  return s;
}

Model ModelSpec::build() const {
  Mobility mob = [&] {
    if (mobility == "linear") return Mobility::linear();
    if (mobility == "saturation") return Mobility::saturation(alpha);
    throw HarnessError("unknown mobility '" + mobility + "' (expected linear or saturation)");
  }();
  Entropy ent = [&] {
    if (entropy == "zero") return Entropy::zero();
    if (entropy == "quadratic") return Entropy::quadratic(entropy_parameter);
    if (entropy == "power") return Entropy::power(entropy_parameter);
    if (entropy == "boltzmann") return Entropy::boltzmann();
    throw HarnessError("unknown entropy '" + entropy + "' (expected zero, quadratic, power or boltzmann)");
  }();
  Potentials pot = [&] {
    if (confinement == "zero") return Potentials::zero();
    if (confinement == "quadratic") return Potentials::quadratic(confinement_strength);
    if (confinement == "linear") return Potentials::linear(confinement_strength);
    if (confinement == "bump") return Potentials::bump(confinement_strength, confinement_radius);
    throw HarnessError("unknown confinement '" + confinement + "' (expected zero, quadratic, linear or bump)");
  }();
  if (kernel == "gaussian") {
    pot = pot.with_gaussian_kernel(kernel_amplitude, kernel_width);
  } else if (kernel == "quadratic") {
    pot = pot.with_quadratic_kernel(kernel_amplitude);
  } else if (kernel != "zero") {
    throw HarnessError("unknown kernel '" + kernel + "' (expected zero, gaussian or quadratic)");
  }
  const std::string name = mobility + "/" + entropy + "/" + confinement + "/" + kernel;
  return make_model(name, std::move(mob), std::move(ent), std::move(pot));
}

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::None:
      return "none";
    case Estimator::Eps1:
      return "eps1";
    case Estimator::Eps2:
      return "eps2";
  }
  return "none";
}

Estimator parse_estimator(const std::string& name) {
  if (name == "none") return Estimator::None;
  if (name == "eps1") return Estimator::Eps1;
  if (name == "eps2") return Estimator::Eps2;
  throw HarnessError("unknown estimator '" + name + "' (expected none, eps1 or eps2)");
}

double ExperimentSpec::tau_for(double h) const { return tau_factor * std::pow(h, tau_exponent); }

void ExperimentSpec::validate() const {
  if (spacings.empty()) throw HarnessError("at least one spacing is required");
  for (double h : spacings) {
    if (!(h > 0.0) || !std::isfinite(h)) throw HarnessError("spacings must be positive");
  }
  if (tau_exponent < 0) throw HarnessError("tau exponent p must be a natural number");
  if (!(tau_factor > 0.0)) throw HarnessError("tau factor must be positive");
  if (!(final_time > 0.0)) throw HarnessError("final time T must be positive");
  if (snapshot_every < 0) throw HarnessError("snapshot_every must be non-negative");
  if (max_retries < 0) throw HarnessError("max_retries must be non-negative");
  options.validate();
  if (estimator == Estimator::Eps2) {
    if (spacings.size() < 2) throw HarnessError("eps2 needs at least two levels in the halving chain");
    for (std::size_t k = 0; k + 1 < spacings.size(); ++k) {
      if (std::abs(spacings[k + 1] - 0.5 * spacings[k]) > 1e-12 * spacings[k]) {
        throw HarnessError("eps2 needs a halving chain of spacings");
      }
    }
  }
  if (estimator == Estimator::Eps1 && initial.kind != InitialCondition::Kind::Barenblatt) {
    throw HarnessError("eps1 needs an exact reference (Barenblatt initial datum)");
  }
}

// ---------------------------------------------------------------------------
// Simulation

Trajectory simulate(const Model& model, std::shared_ptr<const Discretization> disc, const StateField& init,
                    int steps, const SchemeOptions& options, bool track_lambda_entropy) {
  if (steps < 0) throw HarnessError("number of steps must be non-negative");
  Trajectory run;
  run.disc = disc;
  run.h = disc->cells.spacing(0);
  run.tau = init.tau;
  run.levels.reserve(steps + 1);
  run.levels.push_back(init.values);
  run.records.push_back(record_initial(init, model, *disc, track_lambda_entropy));

  const ImplicitStepper stepper(model, *disc, options);
  StateField current = init;
  for (int n = 0; n < steps; ++n) {
    StepResult result = [&] {
      try {
        return stepper.step(current, init.tau);
      } catch (const SolverError& e) {
        std::ostringstream msg;
        msg << "step " << n + 1 << ": " << e.what();
        throw SolverError(msg.str(), e.residual_norm());
      } catch (const SchemeError& e) {
        throw SolverError("step " + std::to_string(n + 1) + ": " + e.what(),
                          std::numeric_limits<double>::quiet_NaN());
      }
    }();
    run.records.push_back(record_step(current, result.next, result.report, model, *disc, options.midpoint,
                                      track_lambda_entropy));
    run.reports.push_back(result.report);
    run.levels.push_back(result.next.values);
    current = std::move(result.next);
  }
  return run;
}

double error_eps1(const Trajectory& run, const std::function<double(double, const Point&)>& exact) {
  const CellIndexSet& cells = run.disc->cells;
  double total = 0.0;
  for (int n = 0; n <= run.steps(); ++n) {
    const double t = n * run.tau;
    const Eigen::VectorXd& p = run.levels[n];
    for (int i = 0; i < cells.size(); ++i) total += std::abs(p[i] - exact(t, cells.center(i)));
  }
  return run.tau * cells.cell_volume() * total;
}

double error_eps2(const Trajectory& run_h, const Trajectory& run_half) {
  const CellIndexSet& coarse = run_h.disc->cells;
  const CellIndexSet& fine = run_half.disc->cells;
  if (coarse.dimension() != fine.dimension()) throw HarnessError("eps2: runs have different dimensions");
  std::vector<long> space_ratio(coarse.dimension());
  for (int k = 0; k < coarse.dimension(); ++k) {
    const auto r = integer_ratio(coarse.spacing(k), fine.spacing(k));
    if (!r) throw HarnessError("eps2: spacings are not nested (misaligned grids)");
    space_ratio[k] = *r;
  }
  const auto time_ratio = integer_ratio(run_h.tau, run_half.tau);
  if (!time_ratio) throw HarnessError("eps2: time steps are not nested (misaligned time grids)");
  if (run_h.steps() * *time_ratio > run_half.steps()) throw HarnessError("eps2: fine run is shorter than coarse run");

  std::vector<int> lookup(coarse.size());
  for (int i = 0; i < coarse.size(); ++i) {
    MultiIndex j = coarse.index(i);
    for (int k = 0; k < coarse.dimension(); ++k) j[k] = static_cast<int>(j[k] * space_ratio[k]);
    const auto pos = fine.find(j);
    if (!pos) throw HarnessError("eps2: coarse cell center is not a fine cell center (misaligned grids)");
    lookup[i] = *pos;
  }

  double total = 0.0;
  for (int n = 0; n <= run_h.steps(); ++n) {
    const Eigen::VectorXd& pc = run_h.levels[n];
    const Eigen::VectorXd& pf = run_half.levels[n * *time_ratio];
    for (int i = 0; i < coarse.size(); ++i) total += std::abs(pc[i] - pf[lookup[i]]);
  }
  return run_h.tau * coarse.cell_volume() * total;
}

RateEstimate rate_estimate(const std::vector<double>& errors) {
  if (errors.size() < 2) throw HarnessError("rate estimate needs at least two error values");
  for (double e : errors) {
    if (!(e > 0.0) || !std::isfinite(e)) throw HarnessError("rate estimate needs positive finite errors");
  }
  RateEstimate out;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    const double rate = std::log2(errors[k] / errors[k + 1]);
    out.rates.push_back(rate);
    if (std::abs(rate) < 0.05) {
      std::ostringstream msg;
      msg << "error is flat between levels " << k << " and " << k + 1 << " (rate " << rate << ")";
      out.warnings.push_back(msg.str());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

LevelResult run_level(const ExperimentSpec& spec, double h) {
  const Model model = spec.model.build();
  const DomainShape domain = spec.domain.build();
  auto disc = std::make_shared<const Discretization>(
      sample_potentials(model.potentials, build_index_set(MeshSpec::uniform(domain.dimension(), h), domain)));

  double tau = spec.tau_for(h);
  LevelResult level;
  for (int attempt = 0;; ++attempt) {
    const auto steps = static_cast<int>(std::ceil(spec.final_time / tau - 1e-9));
    try {
      const StateField init = initial_datum(spec.initial, disc->cells, tau);
      level.trajectory = simulate(model, disc, init, steps, spec.options, spec.track_lambda_entropy);
      level.retries = attempt;
      break;
    } catch (const SolverError& e) {
      if (attempt >= spec.max_retries) {
        std::ostringstream msg;
        msg << "level h = " << h << ", tau = " << tau << ": " << e.what();
        throw SolverError(msg.str(), e.residual_norm());
      }
      tau *= 0.5;
    }
  }
  if (spec.check_envelope) {
    const auto& t = level.trajectory;
    level.envelope = extrema_envelope(t.levels, envelope_params(model, *t.disc, t.levels.front(), t.tau));
  }
  return level;
}

int snapshot_stride(const ExperimentSpec& spec, int steps) {
  if (spec.snapshot_every > 0) return spec.snapshot_every;
  return std::max(1, (steps + 49) / 50);
}

void write_outputs(ArtifactBundle& bundle) {
  const ExperimentSpec& spec = bundle.spec;
  const std::filesystem::path& root = spec.output_dir;
  std::vector<io::ErrorRow> rows;
  for (std::size_t k = 0; k < bundle.levels.size(); ++k) {
    const LevelResult& level = bundle.levels[k];
    const Trajectory& t = level.trajectory;
    const std::filesystem::path dir = root / ("level" + std::to_string(k));
    const auto diag = dir / "diagnostics.csv";
    io::write_diagnostics_csv(diag, t.records);
    bundle.files.push_back(diag);
    const int stride = snapshot_stride(spec, t.steps());
    for (int n = 0; n <= t.steps(); ++n) {
      if (n % stride != 0 && n != t.steps()) continue;
      char name[32];
      std::snprintf(name, sizeof(name), "snapshot_%06d.csv", n);
      const auto snap = dir / name;
      io::write_snapshot_csv(snap, t.disc->cells, t.levels[n]);
      bundle.files.push_back(snap);
    }
    rows.push_back({t.h, t.tau, level.eps1, level.eps2, level.rate});
  }
  if (spec.estimator != Estimator::None) {
    const auto errors = root / "errors.csv";
    io::write_errors_csv(errors, rows);
    bundle.files.push_back(errors);
  }
}

}  // namespace

ArtifactBundle run_preset(const ExperimentSpec& spec) {
  spec.validate();
  ArtifactBundle bundle;
  bundle.spec = spec;

  std::vector<std::future<LevelResult>> futures;
  for (double h : spec.spacings) futures.push_back(std::async(std::launch::async, run_level, std::cref(spec), h));
  for (auto& f : futures) bundle.levels.push_back(f.get());

  std::vector<double> chain;
  if (spec.estimator == Estimator::Eps1) {
    const Barenblatt exact(spec.initial.barenblatt);
    for (LevelResult& level : bundle.levels) {
      level.eps1 = error_eps1(level.trajectory, [&](double t, const Point& x) { return exact(t, x); });
      chain.push_back(*level.eps1);
    }
  } else if (spec.estimator == Estimator::Eps2) {
    for (std::size_t k = 0; k + 1 < bundle.levels.size(); ++k) {
      bundle.levels[k].eps2 = error_eps2(bundle.levels[k].trajectory, bundle.levels[k + 1].trajectory);
      chain.push_back(*bundle.levels[k].eps2);
    }
  }
  if (chain.size() >= 2) {
    const RateEstimate rates = rate_estimate(chain);
    for (std::size_t k = 0; k < rates.rates.size(); ++k) bundle.levels[k].rate = rates.rates[k];
    bundle.warnings.insert(bundle.warnings.end(), rates.warnings.begin(), rates.warnings.end());
  }
  for (std::size_t k = 0; k < bundle.levels.size(); ++k) {
    if (bundle.levels[k].retries > 0) {
      bundle.warnings.push_back("level " + std::to_string(k) + " needed " + std::to_string(bundle.levels[k].retries) +
                                " retries with halved tau");
    }
  }
  if (!spec.output_dir.empty()) write_outputs(bundle);
  return bundle;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct PresetEntry {
  std::string description;
  ExperimentSpec (*make)();
};

ModelSpec saturating_quadratic(double confinement_a) {
  ModelSpec m;
  m.mobility = "saturation";
  m.alpha = 1.0;
  m.entropy = "quadratic";
  m.entropy_parameter = 1.0;
  m.confinement = "quadratic";
  m.confinement_strength = confinement_a;
  return m;
}

ExperimentSpec steady(DomainSpec domain, std::string name) {
  ExperimentSpec s;
  s.name = std::move(name);
  s.domain = std::move(domain);
  s.model = saturating_quadratic(0.5);
  s.initial = InitialCondition::constant(0.6);
  s.spacings = {0.25};
  s.tau_exponent = 1;
  s.tau_factor = 0.4;
  s.final_time = 80.0;
  return s;
}

ExperimentSpec energy_decay(int dimension, double kernel_amplitude, std::string kernel, MidpointRule rule,
                            std::string name) {
  ExperimentSpec s;
  s.name = std::move(name);
  s.domain = dimension == 1 ? DomainSpec::interval(-4.0, 4.0) : DomainSpec::box({-4.0, -4.0}, {4.0, 4.0});
  s.model = saturating_quadratic(0.5);
  s.model.kernel = std::move(kernel);
  s.model.kernel_amplitude = kernel_amplitude;
  s.model.kernel_width = 1.0;
  s.initial = InitialCondition::constant(0.6);
  s.spacings = {dimension == 1 ? 0.1 : 0.4};
  s.tau_exponent = 2;
  s.final_time = 2.0;
  s.options.midpoint = rule;
  return s;
}

ExperimentSpec barenblatt(int dimension) {
  ExperimentSpec s;
  s.name = "barenblatt-" + std::to_string(dimension) + "d";
  s.domain = dimension == 1 ? DomainSpec::interval(-6.0, 6.0) : DomainSpec::box({-6.0, -6.0}, {6.0, 6.0});
  s.model.mobility = "linear";
  s.model.alpha = kNoSaturation;
  s.model.entropy = "power";
  s.model.entropy_parameter = 2.0;
  s.initial = InitialCondition::from_barenblatt({2.0, 2.0, 1.0, dimension});
  s.spacings = dimension == 1 ? std::vector<double>{0.4, 0.2, 0.1} : std::vector<double>{0.8, 0.4};
  s.tau_exponent = 2;
  s.final_time = 0.64;
  s.estimator = Estimator::Eps1;
  s.track_lambda_entropy = true;
  return s;
}

const std::map<std::string, PresetEntry>& catalog() {
  static const std::map<std::string, PresetEntry> entries = {
      {"steady-square",
       {"saturation mobility, U = rho^2, V = |x|^2/2 on the square (-4,4)^2 from rho0 = 0.6, run to a steady state",
        [] { return steady(DomainSpec::box({-4.0, -4.0}, {4.0, 4.0}), "steady-square"); }}},
      {"steady-peanut",
       {"as steady-square on the peanut {(x^2-3.9)^2 + y^2 < 16}",
        [] { return steady(DomainSpec::peanut(), "steady-peanut"); }}},
      {"energy-decay-1d",
       {"saturation drift-diffusion with attractive Gaussian kernel on (-4,4), midpoint interaction (O3)",
        [] { return energy_decay(1, -1.0, "gaussian", MidpointRule::Midpoint, "energy-decay-1d"); }}},
      {"energy-decay-2d",
       {"as energy-decay-1d on (-4,4)^2",
        [] { return energy_decay(2, -1.0, "gaussian", MidpointRule::Midpoint, "energy-decay-2d"); }}},
      {"energy-decay-psd-o1",
       {"repulsive (positive semi-definite) Gaussian kernel with implicit interaction (O1), d = 1",
        [] { return energy_decay(1, 1.0, "gaussian", MidpointRule::Implicit, "energy-decay-psd-o1"); }}},
      {"energy-decay-nsd-o2",
       {"attractive (negative semi-definite) Gaussian kernel with explicit interaction (O2), d = 1",
        [] { return energy_decay(1, -1.0, "gaussian", MidpointRule::Explicit, "energy-decay-nsd-o2"); }}},
      {"energy-decay-indefinite-o3",
       {"indefinite kernel K = 0.05 |x - y|^2 with midpoint interaction (O3), d = 1",
        [] { return energy_decay(1, 0.05, "quadratic", MidpointRule::Midpoint, "energy-decay-indefinite-o3"); }}},
      {"energy-decay-local",
       {"saturation drift-diffusion without kernel (K = 0), d = 1",
        [] { return energy_decay(1, 0.0, "zero", MidpointRule::Midpoint, "energy-decay-local"); }}},
      {"aggregation-equality",
       {"pure aggregation (U = 0) with attractive Gaussian kernel and O3: dissipation holds with equality",
        [] {
          ExperimentSpec s = energy_decay(1, -1.0, "gaussian", MidpointRule::Midpoint, "aggregation-equality");
          s.model.entropy = "zero";
          s.model.confinement = "zero";
          s.initial = InitialCondition::from_function([](const Point& x) { return 0.5 + 0.3 * std::cos(x[0]); });
          s.final_time = 1.0;
          return s;
        }}},
      {"barenblatt-1d",
       {"porous medium m = 2 from the Barenblatt profile (M = 2, t0 = 1) on (-6,6), tau = h^2, eps1 chain",
        [] { return barenblatt(1); }}},
      {"barenblatt-2d",
       {"as barenblatt-1d on (-6,6)^2 with h in {0.8, 0.4}", [] { return barenblatt(2); }}},
      {"saturation-convergence-1d",
       {"m = rho(1-rho), U = rho^2, V = 2x^2 on (-2,2) from rho0 = 0.5, tau = h^2, eps2 chain",
        [] {
          ExperimentSpec s;
          s.name = "saturation-convergence-1d";
          s.domain = DomainSpec::interval(-2.0, 2.0);
          s.model = saturating_quadratic(2.0);
          s.initial = InitialCondition::constant(0.5);
          s.spacings = {0.2, 0.1, 0.05};
          s.tau_exponent = 2;
          s.final_time = 1.0;
          s.estimator = Estimator::Eps2;
          return s;
        }}},
      {"envelope-bump",
       {"m = rho(1-rho), U = rho^2, V = 0.5 (1 - x^2)^2 on (-1,1) from a non-constant datum; extrema envelopes asserted",
        [] {
          ExperimentSpec s;
          s.name = "envelope-bump";
          s.domain = DomainSpec::interval(-1.0, 1.0);
          s.model = saturating_quadratic(0.0);
          s.model.confinement = "bump";
          s.model.confinement_strength = 0.5;
          s.model.confinement_radius = 1.0;
          s.initial = InitialCondition::from_function([](const Point& x) { return 0.5 + 0.3 * x[0]; });
          s.spacings = {0.05};
          s.tau_exponent = 2;
          s.final_time = 0.5;
          s.check_envelope = true;
          return s;
        }}},
      {"envelope-counterexample",
       {"m = rho(1-rho), U = rho^2, V = x on (0,1): boundary gradient does not vanish, envelopes not asserted",
        [] {
          ExperimentSpec s;
          s.name = "envelope-counterexample";
          s.domain = DomainSpec::interval(0.0, 1.0);
          s.model = saturating_quadratic(0.0);
          s.model.confinement = "linear";
          s.model.confinement_strength = 1.0;
          s.initial = InitialCondition::constant(0.5);
          s.spacings = {0.05};
          s.tau_exponent = 2;
          s.final_time = 0.5;
          s.check_envelope = true;
          return s;
        }}},
  };
  return entries;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, entry] : catalog()) names.push_back(name);
  return names;
}

std::string preset_description(const std::string& name) {
  const auto it = catalog().find(name);
  if (it == catalog().end()) throw HarnessError("unknown preset '" + name + "'");
  return it->second.description;
}

ExperimentSpec experiment_preset(const std::string& name) {
  const auto it = catalog().find(name);
  if (it == catalog().end()) throw HarnessError("unknown preset '" + name + "'");
  return it->second.make();
}

}  // namespace satflow
