#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "discret2di/mlp.hpp"
#include "discret2di/time_series.hpp"

namespace d2d {

struct CatVaeConfig {
  std::vector<std::string> channels;        // model input channels, width n
  int categories = 10;                      // K
  double temperature = 0.3;                 // Gumbel-Softmax temperature
  double beta = 0.2;                        // KL weight
  std::vector<int> encoder_layers = {3, 256, 256, 8};
  std::vector<int> decoder_layers = {10, 256, 256, 16};
  int batch_size = 64;
  int max_epochs = 400;
  int patience = 40;
  double learning_rate = 1e-3;
  double logvar_min = -8.0;
  double logvar_max = 4.0;
  std::uint64_t seed = 0;

  int input_dim() const { return static_cast<int>(channels.size()); }
  void validate() const;

  // Three-tank defaults: levels h1..h3, K = 10, temperature 0.3, beta 0.2.
  static CatVaeConfig tank_defaults();
  // Same block shapes with the given channels and category count.
  static CatVaeConfig with_shape(std::vector<std::string> channels, int categories);
};

nlohmann::json to_json(const CatVaeConfig& config);
CatVaeConfig catvae_config_from_json(const nlohmann::json& doc, CatVaeConfig base = {});

// Encoder MLP -> linear logits head; decoder MLP -> linear mean and
// log-variance heads. All computations after the standardizer happen in
// standardized units.
struct CatVaeModel {
  CatVaeConfig config;
  Standardizer standardizer;
  nn::Mlp encoder;
  nn::Mlp logits_head;
  nn::Mlp decoder;
  nn::Mlp mean_head;
  nn::Mlp logvar_head;

  static CatVaeModel initialize(const CatVaeConfig& config, Standardizer standardizer);

  int categories() const { return config.categories; }
  int input_dim() const { return config.input_dim(); }
};

nlohmann::json to_json(const CatVaeModel& model);
CatVaeModel catvae_model_from_json(const nlohmann::json& doc);

struct LatentResult {
  Eigen::VectorXd logits;
  int category = 0;
  double log_likelihood = 0.0;
};

struct ElboTerms {
  double loss = 0.0;            // -recon + beta * kl
  double reconstruction = 0.0;  // mean log p(x|z)
  double kl = 0.0;              // mean KL(q(z|x) || uniform)
};

struct ElboGradients {
  ElboTerms terms;
  nn::Gradients encoder;
  nn::Gradients logits_head;
  nn::Gradients decoder;
  nn::Gradients mean_head;
  nn::Gradients logvar_head;
};

// Standard Gumbel noise, one row per sample.
Eigen::MatrixXd sample_gumbel(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

// softmax((logits + g) / temperature) with fresh Gumbel noise g.
Eigen::VectorXd gumbel_softmax_sample(const Eigen::VectorXd& logits, double temperature,
                                      std::mt19937_64& rng);

// Row-wise softmax and log-softmax.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& x);
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& x);

// KL(softmax(logits) || uniform over K) for one logit vector.
double categorical_kl_uniform(const Eigen::VectorXd& logits);

// Sum over dimensions of log N(x_d; mean_d, exp(logvar_d)).
double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& logvar);

// Objective on a standardized batch with the given Gumbel noise [B x K].
ElboTerms elbo_loss(const CatVaeModel& model, const Eigen::MatrixXd& batch,
                    const Eigen::MatrixXd& gumbel_noise);
// Same, drawing the Gumbel noise from `rng`.
ElboTerms elbo_loss(const CatVaeModel& model, const Eigen::MatrixXd& batch, std::mt19937_64& rng);

ElboGradients elbo_gradients(const CatVaeModel& model, const Eigen::MatrixXd& batch,
                             const Eigen::MatrixXd& gumbel_noise);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;     // 0-based
  double best_val_loss = 0.0;
  int epochs_run = 0;
  bool stopped_early = false;
};

struct TrainResult {
  CatVaeModel model;  // best-validation checkpoint
  TrainHistory history;
};

using EpochCallback = std::function<void(int epoch, double train_loss, double val_loss)>;

// Minibatch training on individual time points. Fits the standardizer on
// `train`, selects config.channels from both inputs, stops after
// max_epochs or `patience` epochs without validation improvement.
TrainResult train_catvae(const CatVaeConfig& config, const TimeSeries& train,
                         const TimeSeries& validation, const EpochCallback& on_epoch = {});

// Deterministic inference on one raw (unstandardized) frame whose entries
// follow config.channels. The decoder receives the one-hot argmax category.
LatentResult infer(const CatVaeModel& model, const Eigen::VectorXd& frame);
// Row-wise inference on raw frames [N x n].
std::vector<LatentResult> infer_batch(const CatVaeModel& model, const Eigen::MatrixXd& frames);

struct DecodedCategory {
  Eigen::VectorXd mean;    // raw units
  Eigen::VectorXd stddev;  // raw units
};
DecodedCategory decode_category(const CatVaeModel& model, int category);

// Index of the largest entry, lowest index on ties.
int argmax(const Eigen::VectorXd& v);

}  // namespace d2d
