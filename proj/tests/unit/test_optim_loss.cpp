#include <gtest/gtest.h>

#include <cmath>

#include "dialectid/error.hpp"
#include "dialectid/loss.hpp"
#include "dialectid/optim.hpp"

using namespace dialectid;

TEST(Schedule, WarmupThenLinearDecay) {
  const auto s = LinearSchedule::make(1.0, 10, 0.2);
  EXPECT_EQ(s.warmup, 2u);
  EXPECT_DOUBLE_EQ(s.at(0), 0.5);
  EXPECT_DOUBLE_EQ(s.at(1), 1.0);
  EXPECT_DOUBLE_EQ(s.at(2), 1.0);
  EXPECT_DOUBLE_EQ(s.at(6), 0.5);
  EXPECT_DOUBLE_EQ(s.at(10), 0.0);
  const auto flat = LinearSchedule::make(2.0, 4, 0.0);
  EXPECT_DOUBLE_EQ(flat.at(0), 2.0);
  EXPECT_DOUBLE_EQ(flat.at(3), 0.5);
}

TEST(Adam, FirstStepMovesBySignTimesLr) {
  Matrix<double> p(1, 3);
  p << 1.0, -2.0, 0.5;
  Matrix<double> g(1, 3);
  g << 0.3, -4.0, 0.0;
  Adam<double> opt;
  opt.step({&p}, {&g}, 0.1);
  EXPECT_NEAR(p(0, 0), 0.9, 1e-6);
  EXPECT_NEAR(p(0, 1), -1.9, 1e-6);
  EXPECT_DOUBLE_EQ(p(0, 2), 0.5);
  EXPECT_EQ(opt.steps_taken(), 1u);
}

TEST(Adam, MinimisesQuadratic) {
  Matrix<double> x = Matrix<double>::Constant(1, 2, 5.0);
  Adam<double> opt;
  for (int i = 0; i < 2000; ++i) {
    Matrix<double> g = 2.0 * x;
    opt.step({&x}, {&g}, 0.05);
  }
  EXPECT_LT(x.cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
  Matrix<double> z(2, 3);
  z << 1, 2, 3, 1000, 1000, 1001;
  const auto p = softmax_rows(z);
  EXPECT_NEAR(p.row(0).sum(), 1.0, 1e-12);
  EXPECT_NEAR(p.row(1).sum(), 1.0, 1e-12);
  Matrix<double> shifted = z.array() + 7.0;
  EXPECT_LT((softmax_rows(shifted) - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CrossEntropy, UniformLogitsGiveLogClassCount) {
  const Matrix<double> z = Matrix<double>::Zero(4, 37);
  const std::vector<std::int32_t> t = {0, 5, 36, 2};
  EXPECT_NEAR(softmax_cross_entropy<double>(z, t), std::log(37.0), 1e-12);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  Matrix<double> z(2, 4);
  z << 0.1, -0.3, 0.7, 0.2, 1.5, 0.0, -1.0, 0.4;
  const std::vector<std::int32_t> t = {2, 0};
  Matrix<double> g;
  softmax_cross_entropy<double>(z, t, &g);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    Matrix<double> up = z, down = z;
    up.data()[i] += 1e-6;
    down.data()[i] -= 1e-6;
    const double num = (softmax_cross_entropy<double>(up, t) - softmax_cross_entropy<double>(down, t)) / 2e-6;
    EXPECT_NEAR(g.data()[i], num, 1e-8);
  }
  EXPECT_THROW(softmax_cross_entropy<double>(z, std::vector<std::int32_t>{9, 0}), ConfigError);
}
