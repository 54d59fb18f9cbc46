#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "satflow/harness.hpp"
#include "test_support.hpp"

using namespace satflow;

namespace {

Trajectory hand_trajectory(const CellIndexSet& cells, double tau, std::vector<Eigen::VectorXd> levels) {
  Trajectory t;
  t.disc = std::make_shared<const Discretization>(fixtures::bare(cells));
  t.h = cells.spacing(0);
  t.tau = tau;
  t.levels = std::move(levels);
  return t;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Eps1, ZeroWhenRunCopiesExactSamples) {
  const CellIndexSet cells = fixtures::line_cells(-5, 11, 0.2);
  const Barenblatt b({2.0, 2.0, 1.0, 1});
  std::vector<Eigen::VectorXd> levels;
  for (int n = 0; n <= 3; ++n) {
    Eigen::VectorXd p(cells.size());
    for (int i = 0; i < cells.size(); ++i) p[i] = b(n * 0.04, cells.center(i));
    levels.push_back(p);
  }
  const Trajectory t = hand_trajectory(cells, 0.04, levels);
  EXPECT_EQ(error_eps1(t, [&](double s, const Point& x) { return b(s, x); }), 0.0);
}

TEST(Eps1, SingleNodeSingleStep) {
  const CellIndexSet cells = fixtures::line_cells(0, 1, 0.5);
  const Trajectory t = hand_trajectory(cells, 0.25, {Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.1)});
  EXPECT_NEAR(error_eps1(t, [](double, const Point&) { return 1.0; }), 0.0125, 1e-15);
}

TEST(Eps2, IdenticalConstantRunsGiveZero) {
  const CellIndexSet coarse = fixtures::line_cells(-2, 5, 0.2);
  const CellIndexSet fine = fixtures::line_cells(-4, 9, 0.1);
  const Trajectory a = hand_trajectory(coarse, 0.04, std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Constant(5, 0.3)));
  const Trajectory b = hand_trajectory(fine, 0.01, std::vector<Eigen::VectorXd>(9, Eigen::VectorXd::Constant(9, 0.3)));
  EXPECT_EQ(error_eps2(a, b), 0.0);
}

TEST(Eps2, SingleDifferingNode) {
  const CellIndexSet coarse = fixtures::line_cells(-2, 5, 0.2);
  const CellIndexSet fine = fixtures::line_cells(-4, 9, 0.1);
  std::vector<Eigen::VectorXd> fl(9, Eigen::VectorXd::Constant(9, 0.3));
  fl[4][fine.find({2, 0, 0}).value()] = 0.8;  // time 0.04 = coarse step 1, x = 0.2 = coarse cell 1
  fl[5][fine.find({1, 0, 0}).value()] = 5.0;  // not a coarse node: ignored
  const Trajectory a = hand_trajectory(coarse, 0.04, std::vector<Eigen::VectorXd>(3, Eigen::VectorXd::Constant(5, 0.3)));
  const Trajectory b = hand_trajectory(fine, 0.01, fl);
  EXPECT_NEAR(error_eps2(a, b), 0.04 * 0.2 * 0.5, 1e-15);
}

TEST(Eps2, MisalignedGridsRejected) {
  const CellIndexSet coarse = fixtures::line_cells(-2, 5, 0.2);
  const Trajectory a = hand_trajectory(coarse, 0.04, std::vector<Eigen::VectorXd>(2, Eigen::VectorXd::Zero(5)));
  const Trajectory odd = hand_trajectory(fixtures::line_cells(-3, 7, 0.15), 0.01,
                                         std::vector<Eigen::VectorXd>(5, Eigen::VectorXd::Zero(7)));
  EXPECT_THROW(error_eps2(a, odd), HarnessError);
  const Trajectory bad_time = hand_trajectory(fixtures::line_cells(-4, 9, 0.1), 0.015,
                                              std::vector<Eigen::VectorXd>(5, Eigen::VectorXd::Zero(9)));
  EXPECT_THROW(error_eps2(a, bad_time), HarnessError);
  const Trajectory missing = hand_trajectory(fixtures::line_cells(-2, 5, 0.1), 0.01,
                                             std::vector<Eigen::VectorXd>(5, Eigen::VectorXd::Zero(5)));
  EXPECT_THROW(error_eps2(a, missing), HarnessError);
}

TEST(Rates, HandValues) {
  EXPECT_DOUBLE_EQ(rate_estimate({0.2, 0.1}).rates.at(0), 1.0);
  EXPECT_NEAR(rate_estimate({0.9, 0.3}).rates.at(0), std::log2(3.0), 1e-15);
  const RateEstimate flat = rate_estimate({1e-12, 1e-12});
  EXPECT_EQ(flat.rates.at(0), 0.0);
  EXPECT_EQ(flat.warnings.size(), 1u);
}

TEST(Rates, InvalidInputs) {
  EXPECT_THROW(rate_estimate({0.1}), HarnessError);
  EXPECT_THROW(rate_estimate({0.1, 0.0}), HarnessError);
  EXPECT_THROW(rate_estimate({-0.1, 0.05}), HarnessError);
}

TEST(Rates, ScaleInvariant) {
  const std::vector<double> e{0.31, 0.17, 0.08, 0.041};
  std::vector<double> scaled;
  for (double x : e) scaled.push_back(7.5 * x);
  const auto a = rate_estimate(e).rates, b = rate_estimate(scaled).rates;
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-14);
}

TEST(Spec, ValidationErrors) {
  ExperimentSpec s = experiment_preset("saturation-convergence-1d");
  s.spacings = {0.1};
  EXPECT_THROW(s.validate(), HarnessError);
  s.spacings = {0.2, 0.15};
  EXPECT_THROW(s.validate(), HarnessError);
  s = experiment_preset("barenblatt-1d");
  s.initial = InitialCondition::constant(0.5);
  EXPECT_THROW(s.validate(), HarnessError);
  EXPECT_THROW(experiment_preset("no-such-preset"), HarnessError);
  ModelSpec m;
  m.kernel = "coulomb";
  EXPECT_THROW(m.build(), HarnessError);
}

TEST(Presets, CatalogCoversRequiredExperiments) {
  const auto names = preset_names();
  for (const char* required : {"steady-square", "steady-peanut", "energy-decay-1d", "energy-decay-2d", "barenblatt-1d",
                               "barenblatt-2d", "saturation-convergence-1d"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), required), names.end()) << required;
  }
  for (const auto& n : names) {
    EXPECT_FALSE(preset_description(n).empty());
    EXPECT_NO_THROW(experiment_preset(n).validate()) << n;
  }
}

TEST(RunPreset, BarenblattChainDecreasesAndWritesArtifacts) {
  ExperimentSpec s = experiment_preset("barenblatt-1d");
  s.output_dir = std::filesystem::temp_directory_path() / "satflow_test_barenblatt";
  std::filesystem::remove_all(s.output_dir);
  const ArtifactBundle b = run_preset(s);
  ASSERT_EQ(b.levels.size(), 3u);
  EXPECT_GT(*b.levels[0].eps1, *b.levels[1].eps1);
  EXPECT_GT(*b.levels[1].eps1, *b.levels[2].eps1);
  EXPECT_TRUE(b.levels[0].rate.has_value());
  EXPECT_TRUE(b.levels[1].rate.has_value());
  EXPECT_FALSE(b.levels[2].rate.has_value());
  const std::string errors = slurp(s.output_dir / "errors.csv");
  EXPECT_EQ(errors.substr(0, errors.find('\n')), "h,tau,eps1,eps2,rate");
  EXPECT_EQ(std::count(errors.begin(), errors.end(), '\n'), 4);
  EXPECT_TRUE(std::filesystem::exists(s.output_dir / "level2" / "diagnostics.csv"));
  EXPECT_TRUE(std::filesystem::exists(s.output_dir / "level2" / "snapshot_000064.csv"));
  std::filesystem::remove_all(s.output_dir);
}

TEST(RunPreset, SaturationEps2ChainDecreases) {
  const ArtifactBundle b = run_preset(experiment_preset("saturation-convergence-1d"));
  ASSERT_TRUE(b.levels[0].eps2 && b.levels[1].eps2);
  EXPECT_FALSE(b.levels[2].eps2.has_value());
  EXPECT_GT(*b.levels[0].eps2, *b.levels[1].eps2);
  // The evolution develops both free boundaries.
  const Eigen::VectorXd& last = b.levels[2].trajectory.levels.back();
  EXPECT_LT(last.minCoeff(), 1e-6);
  EXPECT_GT(last.maxCoeff(), 0.95);
}

TEST(RunPreset, DeterministicOutputs) {
  ExperimentSpec s = experiment_preset("energy-decay-nsd-o2");
  s.final_time = 0.2;
  const auto root = std::filesystem::temp_directory_path() / "satflow_test_determinism";
  std::filesystem::remove_all(root);
  s.output_dir = root / "a";
  run_preset(s);
  s.output_dir = root / "b";
  run_preset(s);
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), root / "a");
    EXPECT_EQ(slurp(entry.path()), slurp(root / "b" / rel)) << rel;
  }
  std::filesystem::remove_all(root);
}

TEST(RunPreset, SolverFailureNamesStepAndResidual) {
  ExperimentSpec s = experiment_preset("energy-decay-local");
  s.final_time = 0.05;
  s.options.newton_max_iters = 1;
  s.options.newton_tol = 1e-15;
  try {
    run_preset(s);
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
    EXPECT_GT(e.residual_norm(), 0.0);
  }
}

TEST(RunPreset, RetryHalvesTau) {
  ExperimentSpec s = experiment_preset("energy-decay-local");
  s.tau_exponent = 0;
  s.tau_factor = 50.0;
  s.final_time = 50.0;
  s.options.newton_max_iters = 4;
  s.max_retries = 12;
  const ArtifactBundle b = run_preset(s);
  EXPECT_GT(b.levels[0].retries, 0);
  EXPECT_LT(b.levels[0].trajectory.tau, 50.0);
  EXPECT_FALSE(b.warnings.empty());
}
