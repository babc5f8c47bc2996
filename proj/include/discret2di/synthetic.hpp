#pragma once

#include <array>
#include <cstdint>

#include "discret2di/time_series.hpp"

namespace d2d::synth {

// Equal-weight mixture of three axis-aligned Gaussians. Channels: x, y, label.
struct MixtureParams {
  std::array<std::array<double, 2>, 3> means = {{{-4.0, -4.0}, {0.0, 4.0}, {4.0, -2.0}}};
  double sigma = 0.5;
};

// Points on the ellipse (a cos t, b sin t) with t drawn from two Gaussian
// angular modes, plus isotropic noise. Channels: x, y, label.
struct EllipseParams {
  double a = 4.0;
  double b = 2.0;
  std::array<double, 2> mode_angles = {0.0, 3.14159265358979323846};
  double angle_sigma = 0.5;
  double noise_sigma = 0.1;
};

TimeSeries generate_property1(int n_samples, std::uint64_t seed, const MixtureParams& params = {});
TimeSeries generate_property2(int n_samples, std::uint64_t seed, const EllipseParams& params = {});

// Euclidean distance from a point to the ellipse (a cos t, b sin t).
double distance_to_ellipse(double x, double y, double a, double b);

}  // namespace d2d::synth
