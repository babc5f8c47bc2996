#pragma once

// Finite-difference checks of the hand-written ELBO backward pass.

#include <algorithm>
#include <cmath>
#include <random>

#include "discret2di/catvae.hpp"

namespace d2d::testing {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

// Small 2-D model with random widths, K, temperature and beta.
inline CatVaeModel random_toy_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> width(3, 8), cats(2, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CatVaeConfig c;
  c.channels = {"x", "y"};
  c.categories = cats(rng);
  c.encoder_layers = {2, width(rng), width(rng)};
  c.decoder_layers = {c.categories, width(rng), width(rng)};
  c.temperature = 0.3 + 0.9 * u(rng);
  c.beta = 0.05 + u(rng);
  c.seed = seed;
  return CatVaeModel::initialize(c, Standardizer::identity(c.channels));
}

inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

// Central differences over every weight and bias of the five networks.
inline GradCheckReport check_elbo_gradients(CatVaeModel model, const Eigen::MatrixXd& batch,
                                            const Eigen::MatrixXd& noise, double h = 1e-5) {
  const ElboGradients g = elbo_gradients(model, batch, noise);
  GradCheckReport rep;
  auto sweep = [&](nn::Mlp& net, const nn::Gradients& grads) {
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      auto visit = [&](double* p, Eigen::Index n, const double* ga) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double orig = p[i];
          p[i] = orig + h;
          const double up = elbo_loss(model, batch, noise).loss;
          p[i] = orig - h;
          const double down = elbo_loss(model, batch, noise).loss;
          p[i] = orig;
          rep.max_rel_error = std::max(rep.max_rel_error, rel_error(ga[i], (up - down) / (2 * h)));
          ++rep.parameters;
        }
      };
      auto& layer = net.layers()[l];
      visit(layer.weight.data(), layer.weight.size(), grads.layers[l].weight.data());
      visit(layer.bias.data(), layer.bias.size(), grads.layers[l].bias.data());
    }
  };
  sweep(model.encoder, g.encoder);
  sweep(model.logits_head, g.logits_head);
  sweep(model.decoder, g.decoder);
  sweep(model.mean_head, g.mean_head);
  sweep(model.logvar_head, g.logvar_head);
  return rep;
}

inline GradCheckReport check_random_configuration(std::uint64_t seed) {
  CatVaeModel model = random_toy_model(seed);
  std::mt19937_64 rng(seed ^ 0xabcdefULL);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int rows = 3 + static_cast<int>(seed % 4);
  Eigen::MatrixXd batch(rows, 2);
  for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data()[i] = nd(rng);
  const Eigen::MatrixXd noise = sample_gumbel(rows, model.categories(), rng);
  return check_elbo_gradients(model, batch, noise);
}

}  // namespace d2d::testing
