#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "satflow/io.hpp"
#include "test_support.hpp"

using namespace satflow;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / "satflow_test_io" / name;
  std::filesystem::create_directories(p.parent_path());
  return p;
}

}  // namespace

TEST(Format, RoundTripsDoubles) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) * std::pow(10.0, k % 40 - 20);
    EXPECT_EQ(std::strtod(io::format_double(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(io::format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_double(2.0), "2");
}

TEST(Snapshot, HeaderAndRowsIn2D) {
  const CellIndexSet cells = fixtures::block_cells(2, 3, 0.5);
  const auto path = scratch("snap2d.csv");
  io::write_snapshot_csv(path, cells, Eigen::VectorXd::LinSpaced(6, 0.0, 1.0));
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "i1,i2,x1,x2,density");
  std::getline(in, line);
  EXPECT_EQ(line, "0,0,0,0,0");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
}

TEST(Snapshot, RoundTripOntoGrid) {
  std::mt19937_64 rng(3);
  const CellIndexSet cells = build_index_set(MeshSpec::uniform(2, 0.5), DomainShape::peanut());
  const Eigen::VectorXd p = fixtures::uniform_vector(rng, cells.size(), 0.0, 1.0);
  const auto path = scratch("peanut.csv");
  io::write_snapshot_csv(path, cells, p);
  const io::FieldRows rows = io::read_snapshot_csv(path);
  EXPECT_EQ(rows.dimension, 2);
  EXPECT_EQ(io::field_on_grid(rows, cells), p);
}

TEST(Snapshot, ShapeMismatchRejected) {
  const auto path = scratch("line.csv");
  io::write_snapshot_csv(path, fixtures::line_cells(0, 4, 0.5), Eigen::VectorXd::Zero(4));
  const io::FieldRows rows = io::read_snapshot_csv(path);
  EXPECT_THROW(io::field_on_grid(rows, fixtures::line_cells(0, 5, 0.5)), io::IoError);
  EXPECT_THROW(io::field_on_grid(rows, fixtures::line_cells(1, 4, 0.5)), io::IoError);
  EXPECT_THROW(io::field_on_grid(rows, fixtures::block_cells(2, 2, 0.5)), io::IoError);
}

TEST(Snapshot, MalformedFilesRejected) {
  const auto path = scratch("bad.csv");
  {
    std::ofstream(path) << "i1,x1,rho\n0,0,1\n";
  }
  EXPECT_THROW(io::read_snapshot_csv(path), io::IoError);
  {
    std::ofstream(path) << "i1,x1,density\n0,0,abc\n";
  }
  EXPECT_THROW(io::read_snapshot_csv(path), io::IoError);
  EXPECT_THROW(io::read_snapshot_csv(scratch("missing.csv")), io::IoError);
}

TEST(Diagnostics, ColumnsAndNullableLambda) {
  DiagnosticsRecord a;
  a.step = 0;
  a.mass = 1.5;
  DiagnosticsRecord b = a;
  b.step = 1;
  b.lambda_entropy = 0.25;
  const auto path = scratch("diag.csv");
  io::write_diagnostics_csv(path, {a, b});
  std::ifstream in(path);
  std::string header, r0, r1;
  std::getline(in, header);
  std::getline(in, r0);
  std::getline(in, r1);
  EXPECT_EQ(header,
            "step,time,mass,free_energy,dissipation_lhs,energy_drop,min_density,max_density,h1_seminorm_dU,"
            "lambda_entropy,newton_iterations,picard_iterations,residual_norm");
  EXPECT_EQ(r0, "0,0,1.5,0,0,0,0,0,0,,0,0,0");
  EXPECT_EQ(r1, "1,0,1.5,0,0,0,0,0,0,0.25,0,0,0");
}

TEST(Errors, NullableColumns) {
  const auto path = scratch("errors.csv");
  io::write_errors_csv(path, {{0.2, 0.04, std::nullopt, 0.5, 1.0}, {0.1, 0.01, std::nullopt, std::nullopt, std::nullopt}});
  std::ifstream in(path);
  std::string l;
  std::getline(in, l);
  EXPECT_EQ(l, "h,tau,eps1,eps2,rate");
  std::getline(in, l);
  EXPECT_EQ(l, "0.20000000000000001,0.040000000000000001,,0.5,1");
  std::getline(in, l);
  EXPECT_EQ(l, "0.10000000000000001,0.01,,,");
}
