#include "discret2di/synthetic.hpp"

#include <cmath>
#include <random>

#include "discret2di/error.hpp"

namespace d2d::synth {

namespace {

TimeSeries assemble(Eigen::MatrixXd values) {
  std::vector<double> ts(static_cast<std::size_t>(values.rows()));
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = static_cast<double>(i);
  return TimeSeries(std::move(ts), {"x", "y", "label"}, std::move(values));
}

}  // namespace

TimeSeries generate_property1(int n_samples, std::uint64_t seed, const MixtureParams& params) {
  if (n_samples < 3) throw Error(ErrorKind::kInvalidArgument, "property 1 needs at least 3 samples");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd values(n_samples, 3);
  for (int i = 0; i < n_samples; ++i) {
    const int k = pick(rng);
    const auto& mu = params.means[static_cast<std::size_t>(k)];
    values(i, 0) = mu[0] + params.sigma * normal(rng);
    values(i, 1) = mu[1] + params.sigma * normal(rng);
    values(i, 2) = k;
  }
  return assemble(std::move(values));
}

TimeSeries generate_property2(int n_samples, std::uint64_t seed, const EllipseParams& params) {
  if (n_samples < 2) throw Error(ErrorKind::kInvalidArgument, "property 2 needs at least 2 samples");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd values(n_samples, 3);
  for (int i = 0; i < n_samples; ++i) {
    const int k = pick(rng);
    const double theta = params.mode_angles[static_cast<std::size_t>(k)] + params.angle_sigma * normal(rng);
    const double nx = normal(rng);
    const double ny = normal(rng);
    values(i, 0) = params.a * std::cos(theta) + params.noise_sigma * nx;
    values(i, 1) = params.b * std::sin(theta) + params.noise_sigma * ny;
    values(i, 2) = k;
  }
  return assemble(std::move(values));
}

double distance_to_ellipse(double x, double y, double a, double b) {
  constexpr int kGrid = 3600;
  constexpr double kTwoPi = 6.283185307179586;
  auto dist2 = [&](double t) {
    const double dx = a * std::cos(t) - x;
    const double dy = b * std::sin(t) - y;
    return dx * dx + dy * dy;
  };
  double best_t = 0.0;
  double best = dist2(0.0);
  for (int i = 1; i < kGrid; ++i) {
    const double t = kTwoPi * i / kGrid;
    const double d = dist2(t);
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  // Golden-section refinement around the best grid point.
  double lo = best_t - kTwoPi / kGrid;
  double hi = best_t + kTwoPi / kGrid;
  const double phi = 0.6180339887498949;
  for (int it = 0; it < 80; ++it) {
    const double m1 = hi - phi * (hi - lo);
    const double m2 = lo + phi * (hi - lo);
    if (dist2(m1) < dist2(m2)) hi = m2; else lo = m1;
  }
  return std::sqrt(std::min(best, dist2(0.5 * (lo + hi))));
}

}  // namespace d2d::synth
