// Values computed by tests/oracle/dense_oracle.py (numpy, independent
// dense assembly and recursion) and frozen here.
#include <gtest/gtest.h>

#include "support.hpp"

using namespace geostorage;
using testing_support::golden_config;
using testing_support::unit_config;

TEST(OracleValues, GoldenOperator) {
  const StorageConfig c = golden_config();
  const GridModel g = build_grid(c);
  const SystemMatrices m = assemble(c, g);
  EXPECT_EQ(g.n(), 45);
  EXPECT_EQ(m.on.a.nonZeros(), 197);
  EXPECT_EQ(m.off.a.nonZeros(), 197);
  EXPECT_NEAR(max_norm(m.on.a), 0.040011483253588519, 1e-15);
  EXPECT_NEAR(max_norm(m.off.a), 9.0000000000000006e-05, 1e-18);
  EXPECT_NEAR(max_norm(Eigen::MatrixXd(m.on.b)), 0.020000574162679426, 1e-15);
  EXPECT_NEAR(max_norm(Eigen::MatrixXd(m.off.b)), 1.0465116279069766e-05, 1e-18);
  EXPECT_NEAR(m.on.a.coeff(0, 0), -3.2965116279069768e-05, 1e-18);
  EXPECT_NEAR(m.on.b(0, 1), 1.0465116279069766e-05, 1e-18);
  EXPECT_NEAR(eigen_oracle(m.on.a).max_real, -1.3051835788506561e-06, 1e-14);
  EXPECT_NEAR(eigen_oracle(m.off.a).max_real, -1.4843337378598235e-07, 1e-14);
}

TEST(OracleValues, GoldenCrankNicolsonRun) {
  const StorageConfig c = golden_config();
  const GridModel g = build_grid(c);
  PumpSchedule sched({{0, 1800, PumpRegime::On, constant_inlet(40)}, {1800, 3600, PumpRegime::Off, constant_inlet(0)}},
                     3600.0, 60.0);
  const ThetaStepper st(c, g, assemble(c, g), sched, 0.5);
  const auto tr = simulate(st, Vector::Constant(g.n(), 10.0), {30, true});
  ASSERT_EQ(tr.snapshots.size(), 3u);
  const Vector& y30 = tr.snapshots[1].state;
  const Vector& yn = tr.snapshots[2].state;
  EXPECT_NEAR(y30[4], 39.999998845974346, 1e-10);
  EXPECT_NEAR(y30[20], 10.218649364807153, 1e-10);
  EXPECT_NEAR(max_norm(yn), 39.999586579553309, 1e-10);
  EXPECT_NEAR(yn[0], 10.179465274013541, 1e-10);
  EXPECT_NEAR(yn[g.n() - 1], 10.000258067190671, 1e-10);
  EXPECT_NEAR(yn.sum(), 904.53148324308006, 1e-8);
}

TEST(OracleValues, UnitThresholds) {
  const StorageConfig c = unit_config();
  const GridModel g = build_grid(c);
  const SystemMatrices m = assemble(c, g);
  EXPECT_EQ(stability_eta(c, g), 5.0);
  EXPECT_EQ(max_norm(m.on.a), 8.0);
  EXPECT_EQ(max_norm(m.off.a), 7.0);
}
