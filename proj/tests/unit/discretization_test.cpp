#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "discret2di/discretization.hpp"
#include "discret2di/error.hpp"

namespace {

// Two unit-variance components at -3 and +3 on channel "x".
d2d::GmmModel two_bumps() {
  d2d::GmmModel m;
  m.channels = {"x"};
  m.standardizer = d2d::Standardizer::identity({"x"});
  m.weights = Eigen::Vector2d(0.5, 0.5);
  m.means = Eigen::MatrixXd(2, 1);
  m.means << -3.0, 3.0;
  m.covariances = {Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1)};
  return m;
}

d2d::TimeSeries series(const std::vector<double>& xs) {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(xs.size()), 2);
  std::vector<double> t;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    v(static_cast<Eigen::Index>(i), 0) = 7.0;
    v(static_cast<Eigen::Index>(i), 1) = xs[i];
    t.push_back(10.0 + static_cast<double>(i));
  }
  return d2d::TimeSeries(t, {"other", "x"}, v);
}

}  // namespace

TEST(ResidualDiscretizer, ThresholdIsInclusive) {
  const d2d::ResidualDiscretizer r;
  EXPECT_DOUBLE_EQ(r.threshold(), -50.0);
  EXPECT_TRUE(r(-50.0).ok);
  EXPECT_FALSE(r(std::nextafter(-50.0, -100.0)).ok);
  EXPECT_TRUE(r(0.0).ok);
  EXPECT_FALSE(r(-std::numeric_limits<double>::infinity()).ok);
  EXPECT_FALSE(r(std::nan("")).ok);
  EXPECT_THROW(d2d::ResidualDiscretizer(std::nan("")), d2d::Error);
  EXPECT_THROW(d2d::ResidualDiscretizer(-std::numeric_limits<double>::infinity()), d2d::Error);
}

TEST(ResidualDiscretizer, RaisingThresholdNeverRestoresOk) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-200.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double ll = u(rng), lo = u(rng), hi = lo + std::abs(u(rng));
    if (!d2d::ResidualDiscretizer(lo)(ll).ok) EXPECT_FALSE(d2d::ResidualDiscretizer(hi)(ll).ok);
  }
}

TEST(DiscretizeRun, GmmStatesAndResiduals) {
  const auto seq = d2d::discretize_run(two_bumps(), series({-3.0, 2.5, 40.0}), d2d::ResidualDiscretizer(-20.0));
  ASSERT_EQ(seq.size(), 3u);
  EXPECT_EQ(seq[0].state.id, 0);
  EXPECT_EQ(seq[1].state.id, 1);
  EXPECT_EQ(seq[0].state.source, d2d::StateSource::kGmm);
  EXPECT_DOUBLE_EQ(seq[1].timestamp, 11.0);
  // log(0.5 N(0) + 0.5 N(-6)) at x = -3
  const double expected = std::log(0.5 * std::exp(-0.5 * std::log(2 * std::numbers::pi)) +
                                   0.5 * std::exp(-0.5 * std::log(2 * std::numbers::pi) - 18.0));
  EXPECT_NEAR(seq[0].log_likelihood, expected, 1e-12);
  EXPECT_TRUE(seq[0].residual.ok);
  EXPECT_TRUE(seq[1].residual.ok);
  EXPECT_FALSE(seq[2].residual.ok);
  EXPECT_EQ(d2d::state_histogram(seq), (std::map<int, std::size_t>{{0, 1}, {1, 2}}));
  EXPECT_TRUE(d2d::discretize_run(two_bumps(), d2d::TimeSeries{}).empty());
}

TEST(DiscretizeRun, MissingChannelIsASchemaError) {
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(2, 1);
  const d2d::TimeSeries ts({0, 1}, {"y"}, v);
  EXPECT_THROW(d2d::discretize_run(two_bumps(), ts), d2d::Error);
}

TEST(SymbolSequence, CsvRoundTrip) {
  const auto seq = d2d::discretize_run(two_bumps(), series({-3.1, 0.2, 3.3, 19.0}), d2d::ResidualDiscretizer(-30.0));
  const auto csv = d2d::symbol_sequence_to_csv(seq);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "timestamp,state_id,residual_ok,log_likelihood");
  const auto path = std::filesystem::temp_directory_path() / "d2d_symbols.csv";
  d2d::save_symbol_sequence(seq, path);
  const auto back = d2d::load_symbol_sequence(path, d2d::StateSource::kGmm);
  std::filesystem::remove(path);
  ASSERT_EQ(back.size(), seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    EXPECT_EQ(back[i].timestamp, seq[i].timestamp);
    EXPECT_EQ(back[i].state, seq[i].state);
    EXPECT_EQ(back[i].residual, seq[i].residual);
    EXPECT_EQ(back[i].log_likelihood, seq[i].log_likelihood);
  }
}
