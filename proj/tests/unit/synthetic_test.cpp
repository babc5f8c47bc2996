#include <gtest/gtest.h>

#include <cmath>

#include "discret2di/synthetic.hpp"

namespace synth = d2d::synth;

TEST(Property1, ComponentCountsConcentrate) {
  const auto ts = synth::generate_property1(3000, 17);
  ASSERT_EQ(ts.rows(), 3000u);
  EXPECT_EQ(ts.channels(), (std::vector<std::string>{"x", "y", "label"}));
  std::array<int, 3> counts{};
  for (Eigen::Index i = 0; i < 3000; ++i) ++counts[static_cast<std::size_t>(ts.values()(i, 2))];
  // Binomial(3000, 1/3): sd ~ 25.8, allow 4 sd.
  for (int c : counts) EXPECT_NEAR(c, 1000, 4 * std::sqrt(3000.0 / 3 * 2 / 3));
}

TEST(Property1, ZeroSigmaGivesPointClusters) {
  synth::MixtureParams p;
  p.sigma = 0.0;
  const auto ts = synth::generate_property1(300, 2, p);
  for (Eigen::Index i = 0; i < 300; ++i) {
    const auto& mu = p.means[static_cast<std::size_t>(ts.values()(i, 2))];
    EXPECT_EQ(ts.values()(i, 0), mu[0]);
    EXPECT_EQ(ts.values()(i, 1), mu[1]);
  }
}

TEST(Property2, NoiselessPointsLieOnEllipse) {
  synth::EllipseParams p;
  p.noise_sigma = 0.0;
  const auto ts = synth::generate_property2(1000, 4, p);
  for (Eigen::Index i = 0; i < 1000; ++i) {
    const double x = ts.values()(i, 0) / p.a, y = ts.values()(i, 1) / p.b;
    EXPECT_NEAR(x * x + y * y, 1.0, 1e-9);
  }
}

TEST(Property2, ModesSitAtTheirAngles) {
  const auto ts = synth::generate_property2(2000, 4);
  double sx0 = 0, sx1 = 0;
  int n0 = 0, n1 = 0;
  for (Eigen::Index i = 0; i < 2000; ++i) {
    if (ts.values()(i, 2) == 0) {
      sx0 += ts.values()(i, 0);
      ++n0;
    } else {
      sx1 += ts.values()(i, 0);
      ++n1;
    }
  }
  EXPECT_GT(sx0 / n0, 2.0);
  EXPECT_LT(sx1 / n1, -2.0);
}

TEST(EllipseDistance, AgreesWithDenseSampling) {
  const double a = 4, b = 2;
  EXPECT_NEAR(synth::distance_to_ellipse(4, 0, a, b), 0.0, 1e-9);
  EXPECT_NEAR(synth::distance_to_ellipse(5, 0, a, b), 1.0, 1e-9);
  EXPECT_NEAR(synth::distance_to_ellipse(0, 3, a, b), 1.0, 1e-9);
  for (double x : {-3.0, 0.5, 2.0}) {
    for (double y : {-1.5, 0.2, 2.5}) {
      double best = 1e9;
      for (int i = 0; i < 200000; ++i) {
        const double t = 2 * M_PI * i / 200000;
        best = std::min(best, std::hypot(a * std::cos(t) - x, b * std::sin(t) - y));
      }
      EXPECT_NEAR(synth::distance_to_ellipse(x, y, a, b), best, 1e-6);
    }
  }
}
