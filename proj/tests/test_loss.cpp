#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pidoc/loss.hpp"
#include "pidoc/vdp.hpp"

using pidoc::Jet2;
using pidoc::LambdaMode;
using pidoc::LossParts;
using pidoc::SignalSample;

TEST(MseNn, Examples) {
  const std::vector<double> a{0.3, -1.0, 2.0};
  EXPECT_EQ(pidoc::mse_nn(a, a, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(pidoc::mse_nn(std::vector<double>{0, 0}, std::vector<double>{2, 2}, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(pidoc::mse_nn(std::vector<double>{1, -1, 3}, std::vector<double>{1, 1, 1}, 1.0), 8.0 / 3.0);
}

TEST(MseNn, RejectsMismatch) {
  EXPECT_THROW((void)pidoc::mse_nn(std::vector<double>{1, 2}, std::vector<double>{1}, 1.0), pidoc::LengthMismatch);
}

TEST(MseI, Examples) {
  EXPECT_EQ(pidoc::mse_i(0.0, 0.0), 0.0);
  EXPECT_EQ(pidoc::mse_i(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(pidoc::mse_i(0.3, 0.0), 0.09);
}

TEST(MseD, ExactMatchIsZero) {
  const std::vector<SignalSample> d{{1.0, 0.5, -1.0}, {0.2, 3.0, -0.2}};
  const std::vector<Jet2> j{{1.0, 7.0, -1.0}, {0.2, -1.0, -0.2}};
  EXPECT_EQ(pidoc::mse_d(j, d), 0.0);
}

TEST(MseD, ZeroOutputOnHarmonicGrid) {
  const pidoc::DesiredSignal sig{2.0};
  const std::vector<SignalSample> d{pidoc::desired(sig, 0.0), pidoc::desired(sig, std::numbers::pi / 2)};
  const std::vector<Jet2> j(2);
  EXPECT_EQ(pidoc::mse_d(j, d), 0.0);
}

TEST(MseD, ValueOffset) {
  const std::vector<SignalSample> d(2);
  const std::vector<Jet2> j{{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  EXPECT_DOUBLE_EQ(pidoc::mse_d(j, d), 1.0);
}

TEST(MseD, GroupingIsSumBeforeSquare) {
  // Residuals of +1 in acceleration and -1 in position cancel under the combined grouping.
  const std::vector<SignalSample> d{{0.0, 0.0, 1.0}};
  const std::vector<Jet2> j{{1.0, 0.0, 0.0}};
  EXPECT_EQ(pidoc::mse_d(j, d), 0.0);
}

TEST(TotalLoss, LambdaModes) {
  const LossParts parts{1.0, 2.0, 3.0};
  EXPECT_EQ(pidoc::total_loss(parts, LambdaMode::finite(1.0)).total, 6.0);
  EXPECT_EQ(pidoc::total_loss(parts, LambdaMode::finite(0.0)).total, 3.0);
  EXPECT_EQ(pidoc::total_loss(parts, LambdaMode::infinite()).total, 3.0);
  EXPECT_EQ(pidoc::total_loss(parts, LambdaMode::finite(10.0)).total, 33.0);
  const auto b = pidoc::total_loss(parts, LambdaMode::infinite());
  EXPECT_EQ(b.mse_nn, 1.0);
  EXPECT_EQ(b.mse_i, 2.0);
  EXPECT_EQ(b.mse_d, 3.0);
}

TEST(TotalLoss, MonotoneInEachComponent) {
  for (double lambda : {0.0, 0.5, 1.0, 1000.0}) {
    const auto mode = LambdaMode::finite(lambda);
    for (double base : {0.0, 0.1, 2.0})
      for (double step : {0.0, 1e-9, 0.3, 5.0}) {
        const double t0 = pidoc::total_loss({base, base, base}, mode).total;
        EXPECT_GE(pidoc::total_loss({base + step, base, base}, mode).total, t0);
        EXPECT_GE(pidoc::total_loss({base, base + step, base}, mode).total, t0);
        EXPECT_GE(pidoc::total_loss({base, base, base + step}, mode).total, t0);
      }
  }
}

TEST(LambdaMode, ParseAndValidate) {
  EXPECT_TRUE(LambdaMode::parse("inf").is_infinite());
  EXPECT_EQ(LambdaMode::parse("10").value(), 10.0);
  EXPECT_EQ(LambdaMode::parse("1000").to_string(), "1000");
  EXPECT_EQ(LambdaMode::infinite().to_string(), "inf");
  EXPECT_THROW((void)LambdaMode::finite(-1.0), pidoc::InvalidArgument);
  EXPECT_THROW((void)LambdaMode::parse("abc"), pidoc::Error);
}

TEST(ControlLoss, ZeroNetworkCanaryOnFullGrid) {
  const auto traj = pidoc::integrate(pidoc::VdpConfig{});
  const pidoc::NetworkParams zero(pidoc::LayerSpec::hidden(6, 30), pidoc::InputScaling::unit_interval(0.0, 30.0));
  for (double amp : {1.0, 2.0, 3.0, 5.0, 0.37}) {
    const pidoc::ControlLoss loss(traj.t, traj.x, pidoc::DesiredSignal{amp}, LambdaMode::finite(1.0));
    const auto b = loss.evaluate(zero);
    EXPECT_LT(b.mse_d, 1e-20) << "amplitude " << amp;
    EXPECT_GE(b.mse_nn, 0.0);
    EXPECT_GE(b.mse_i, 0.0);
  }
}

TEST(ControlLoss, BreakdownMatchesFreeFunctions) {
  const auto traj = pidoc::integrate(pidoc::VdpConfig{});
  const auto p = pidoc::init_params(pidoc::LayerSpec::hidden(2, 8), 3, pidoc::InputScaling::unit_interval(0.0, 30.0));
  const pidoc::ControlLoss loss(traj.t, traj.x, pidoc::DesiredSignal{2.0}, LambdaMode::finite(10.0));
  const auto b = loss.evaluate(p);

  std::vector<double> x_pred;
  std::vector<Jet2> jets;
  for (double t : traj.t) {
    jets.push_back(pidoc::forward_jet(p, t));
    x_pred.push_back(jets.back().val);
  }
  EXPECT_NEAR(b.mse_nn, pidoc::mse_nn(traj.x, x_pred, 2.0), 1e-12);
  EXPECT_NEAR(b.mse_i, pidoc::mse_i(x_pred[0], 0.0), 1e-12);
  EXPECT_NEAR(b.mse_d, pidoc::mse_d(jets, loss.desired_samples()), 1e-12);
  EXPECT_NEAR(b.total, b.mse_nn + b.mse_i + 10.0 * b.mse_d, 1e-12);
}

TEST(ControlLoss, InfiniteModeGradientIgnoresData) {
  std::vector<double> t{0.0, 0.5, 1.0, 1.5};
  const auto p = pidoc::init_params(pidoc::LayerSpec::parse("1,4,1"), 5);
  const pidoc::ControlLoss a(t, {0, 0, 0, 0}, pidoc::DesiredSignal{2.0}, LambdaMode::infinite());
  const pidoc::ControlLoss b(t, {5, -3, 1, 9}, pidoc::DesiredSignal{2.0}, LambdaMode::infinite());
  Eigen::VectorXd ga, gb;
  EXPECT_EQ(a.evaluate(p, ga).total, b.evaluate(p, gb).total);
  EXPECT_EQ(ga, gb);
}

TEST(ControlLoss, RejectsMismatchedGrid) {
  EXPECT_THROW(pidoc::ControlLoss({0.0, 1.0}, {0.0}, pidoc::DesiredSignal{2.0}, LambdaMode::finite(1.0)),
               pidoc::LengthMismatch);
}
