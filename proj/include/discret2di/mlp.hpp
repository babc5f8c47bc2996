#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace d2d::nn {

// Fully connected layer computing x * weight + bias. weight is [in x out].
struct Dense {
  Eigen::MatrixXd weight;
  Eigen::RowVectorXd bias;

  Eigen::Index in() const { return weight.rows(); }
  Eigen::Index out() const { return weight.cols(); }
};

// Per-layer intermediate values of one forward call.
struct Tape {
  std::vector<Eigen::MatrixXd> inputs;          // input to each layer
  std::vector<Eigen::MatrixXd> pre_activations; // x * W + b of each layer
  std::vector<Eigen::MatrixXd> outputs;         // after activation
};

struct Gradients {
  std::vector<Dense> layers;
  Eigen::MatrixXd input;  // dL/dx of the batch fed to forward()

  void set_zero();
  void add(const Gradients& other);
  bool all_finite() const;
};

// Multilayer perceptron with tanh on hidden layers and identity on the
// output layer. Batch-first: inputs are [batch x features].
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Dense> layers);

  // Glorot-uniform weights, zero biases.
  static Mlp glorot(const std::vector<int>& sizes, std::mt19937_64& rng);
  static Mlp glorot(const std::vector<int>& sizes, std::uint64_t seed);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Tape* tape = nullptr) const;
  Gradients backward(const Tape& tape, const Eigen::MatrixXd& output_grad) const;

  std::vector<int> sizes() const;
  Eigen::Index input_width() const { return layers_.front().in(); }
  Eigen::Index output_width() const { return layers_.back().out(); }
  std::size_t parameter_count() const;
  bool all_finite() const;

  std::vector<Dense>& layers() { return layers_; }
  const std::vector<Dense>& layers() const { return layers_; }

  Gradients zero_gradients() const;

 private:
  std::vector<Dense> layers_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamOptions options;
  Gradients first_moment;
  Gradients second_moment;
  std::int64_t step = 0;

  static AdamState for_model(const Mlp& net, AdamOptions options = {});
};

// Bias-corrected Adam update. Throws on non-finite gradients.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state);

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

}  // namespace d2d::nn
