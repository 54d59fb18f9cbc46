#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "satflow/diagnostics.hpp"
#include "satflow/exact.hpp"
#include "satflow/grid.hpp"
#include "satflow/model.hpp"
#include "satflow/scheme.hpp"

namespace satflow {

class HarnessError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Plain-data description of a domain; `build()` gives the shape.
struct DomainSpec {
  std::string name = "interval";  // interval | box | ball | peanut
  std::vector<double> lower{-1.0};
  std::vector<double> upper{1.0};
  std::vector<double> center{0.0};
  double radius = 1.0;
  double peanut_a = 3.9;
  double peanut_r = 4.0;

  DomainShape build() const;
  int dimension() const;

  static DomainSpec interval(double a, double b);
  static DomainSpec box(std::vector<double> lower, std::vector<double> upper);
  static DomainSpec ball(std::vector<double> center, double radius);
  static DomainSpec peanut(double a = 3.9, double r = 4.0);
};

/// Plain-data description of a model; `build()` gives the Model.
struct ModelSpec {
  std::string mobility = "saturation";  // linear | saturation
  double alpha = 1.0;
  std::string entropy = "quadratic";  // zero | quadratic | power | boltzmann
  double entropy_parameter = 1.0;     // coefficient c or exponent m
  std::string confinement = "zero";   // zero | quadratic | linear | bump
  double confinement_strength = 0.0;  // a, c or bump amplitude
  double confinement_radius = 1.0;    // bump only
  std::string kernel = "zero";        // zero | gaussian | quadratic
  double kernel_amplitude = 0.0;
  double kernel_width = 1.0;

  Model build() const;
};

enum class Estimator { None, Eps1, Eps2 };
std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& name);

struct ExperimentSpec {
  std::string name = "custom";
  DomainSpec domain;
  ModelSpec model;
  InitialCondition initial = InitialCondition::constant(0.5);
  std::vector<double> spacings{0.1};
  int tau_exponent = 2;      // tau = tau_factor * h^p
  double tau_factor = 1.0;
  double final_time = 1.0;
  SchemeOptions options;
  Estimator estimator = Estimator::None;
  bool check_envelope = false;
  bool track_lambda_entropy = false;
  int snapshot_every = 0;  // 0 means ceil(N / 50)
  int max_retries = 0;     // whole-run retries with tau halved
  std::filesystem::path output_dir;

  double tau_for(double h) const;
  void validate() const;
};

/// A solved trajectory on one grid.
struct Trajectory {
  std::shared_ptr<const Discretization> disc;
  double h = 0.0;
  double tau = 0.0;
  std::vector<Eigen::VectorXd> levels;  // levels[0] = P^0
  std::vector<DiagnosticsRecord> records;
  std::vector<SolveReport> reports;

  int steps() const { return static_cast<int>(levels.size()) - 1; }
};

/// Advances `init` by `steps` implicit steps and records diagnostics for every level.
Trajectory simulate(const Model& model, std::shared_ptr<const Discretization> disc, const StateField& init,
                    int steps, const SchemeOptions& options, bool track_lambda_entropy = false);

/// eps1 = tau h^d sum_{n=0}^{N} sum_i |P^n_i - rho(n tau, x_i)|: node samples of the run against the reference.
double error_eps1(const Trajectory& run, const std::function<double(double, const Point&)>& exact);

/// eps2 = tau_h h^d sum_{n=0}^{N_h} sum_{i in I_h} |P_h^n(h i) - P_{h/2}^{r n}(h i)| with r = tau_h / tau_{h/2},
/// reading the fine run exactly at the coarse nodes and times. Throws on misaligned grids.
double error_eps2(const Trajectory& run_h, const Trajectory& run_half);

struct RateEstimate {
  std::vector<double> rates;
  std::vector<std::string> warnings;
};

/// rate_k = log2(e_k / e_{k+1}) along a halving chain.
RateEstimate rate_estimate(const std::vector<double>& errors);

struct LevelResult {
  Trajectory trajectory;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<double> rate;
  std::optional<EnvelopeResult> envelope;
  int retries = 0;
};

struct ArtifactBundle {
  ExperimentSpec spec;
  std::vector<LevelResult> levels;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> files;
};

/// Runs every level of the experiment (levels in parallel), then the estimators.
/// Writes diagnostics, snapshots and the error/rate table when spec.output_dir is set.
ArtifactBundle run_preset(const ExperimentSpec& spec);

/// Named experiments.
std::vector<std::string> preset_names();
std::string preset_description(const std::string& name);
ExperimentSpec experiment_preset(const std::string& name);

}  // namespace satflow
