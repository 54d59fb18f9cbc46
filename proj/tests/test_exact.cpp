#include <gtest/gtest.h>

#include <cmath>

#include "satflow/exact.hpp"
#include "test_support.hpp"

using namespace satflow;

namespace {

double midpoint_mass_1d(const Barenblatt& b, double t, double half_width, int n) {
  const double h = 2.0 * half_width / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += b(t, Point::Constant(1, -half_width + (i + 0.5) * h));
  return s * h;
}

}  // namespace

TEST(Barenblatt, Symmetric) {
  for (int d : {1, 2}) {
    const Barenblatt b({2.0, 2.0, 1.0, d});
    const Point x = Point::LinSpaced(d, 0.3, 0.9);
    EXPECT_EQ(b(0.2, x), b(0.2, -x));
  }
}

TEST(Barenblatt, MassByMidpointQuadrature) {
  const Barenblatt b({2.0, 2.0, 1.0, 1});
  for (double t : {0.0, 0.5}) EXPECT_NEAR(midpoint_mass_1d(b, t, 6.0, 200000), 2.0, 1e-6);
}

TEST(Barenblatt, MassInTwoDimensions) {
  const Barenblatt b({2.0, 2.0, 1.0, 2});
  const int n = 1200;
  const double h = 12.0 / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += b(0.0, Eigen::Vector2d(-6.0 + (i + 0.5) * h, -6.0 + (j + 0.5) * h));
  EXPECT_NEAR(s * h * h, 2.0, 1e-4);
}

TEST(Barenblatt, ConstantMatchesM2ClosedForm) {
  // d = 1, m = 2: beta = 1/3, kappa = 1/12, B(t0=1, x) = (C - x^2/12)_+, mass = (4/3) C^{3/2} sqrt(12).
  const Barenblatt b({2.0, 2.0, 1.0, 1});
  EXPECT_DOUBLE_EQ(b.beta(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(b.kappa(), 1.0 / 12.0);
  const double c = std::pow(2.0 / (4.0 / 3.0 * std::sqrt(12.0)), 2.0 / 3.0);
  EXPECT_NEAR(b.constant(), c, 1e-14);
  EXPECT_NEAR(b(0.0, Point::Zero(1)), c, 1e-14);
}

TEST(Barenblatt, SolvesPorousMediumEquation) {
  for (int d : {1, 2}) {
    const Barenblatt b({2.0, 2.0, 1.0, d});
    const double e = 1e-3;
    const double t = 0.3;
    Point x = Point::Constant(d, 0.4);
    const double dt = (b(t + e, x) - b(t - e, x)) / (2 * e);
    double lap = 0.0;
    for (int k = 0; k < d; ++k) {
      Point xp = x, xm = x;
      xp[k] += e;
      xm[k] -= e;
      lap += (std::pow(b(t, xp), 2) - 2 * std::pow(b(t, x), 2) + std::pow(b(t, xm), 2)) / (e * e);
    }
    EXPECT_NEAR(dt, lap, 1e-4) << "d=" << d;
  }
}

TEST(Barenblatt, SupportStaysInsideComputationalBox) {
  for (int d : {1, 2}) {
    const Barenblatt b({2.0, 2.0, 1.0, d});
    EXPECT_LT(b.support_radius(0.64), 5.0);
    EXPECT_EQ(b(0.0, Point::Constant(d, b.support_radius(0.0))), 0.0);
  }
}

TEST(Barenblatt, InvalidParameters) {
  EXPECT_THROW(Barenblatt({1.0, 2.0, 1.0, 1}), ExactError);
  EXPECT_THROW(Barenblatt({2.0, 0.0, 1.0, 1}), ExactError);
  EXPECT_THROW(Barenblatt({2.0, 2.0, 0.0, 1}), ExactError);
  EXPECT_THROW(Barenblatt({2.0, 2.0, 1.0, 4}), ExactError);
}

TEST(InitialDatum, Constant) {
  const StateField f = initial_datum(InitialCondition::constant(0.6), fixtures::block_cells(3, 3, 0.5), 0.1);
  EXPECT_TRUE((f.values.array() == 0.6).all());
  EXPECT_EQ(f.time_index, 0);
}

TEST(InitialDatum, BarenblattCenterValue) {
  const CellIndexSet cells = build_index_set(MeshSpec::uniform(1, 0.1), DomainShape::interval(-6, 6));
  const InitialCondition init = InitialCondition::from_barenblatt({2.0, 2.0, 1.0, 1});
  const StateField f = initial_datum(init, cells, 0.01);
  const Barenblatt b(init.barenblatt);
  EXPECT_DOUBLE_EQ(f.values[cells.find({0, 0, 0}).value()], b.constant());
  // First-order quadrature of the sampled mass.
  EXPECT_NEAR(f.values.sum() * cells.cell_volume(), 2.0, 0.1 * 0.5);
}

TEST(InitialDatum, CustomZero) {
  const StateField f =
      initial_datum(InitialCondition::from_function([](const Point&) { return 0.0; }), fixtures::line_cells(0, 4, 1.0), 1.0);
  EXPECT_TRUE(f.values.isZero(0.0));
}

TEST(InitialDatum, DimensionMismatch) {
  EXPECT_THROW(initial_datum(InitialCondition::from_barenblatt({2.0, 2.0, 1.0, 2}), fixtures::line_cells(0, 4, 1.0), 1.0),
               ExactError);
}
