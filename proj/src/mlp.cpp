#include "discret2di/mlp.hpp"

#include <cmath>

#include "discret2di/error.hpp"

namespace d2d::nn {

void Gradients::set_zero() {
  for (auto& l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  input.setZero();
}

void Gradients::add(const Gradients& other) {
  if (other.layers.size() != layers.size()) throw Error(ErrorKind::kSchema, "gradient shape mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    layers[i].weight += other.layers[i].weight;
    layers[i].bias += other.layers[i].bias;
  }
}

bool Gradients::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

Mlp::Mlp(std::vector<Dense> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorKind::kInvalidArgument, "mlp needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].bias.size() != layers_[i].out()) {
      throw Error(ErrorKind::kSchema, "bias width mismatch in layer " + std::to_string(i));
    }
    if (i > 0 && layers_[i].in() != layers_[i - 1].out()) {
      throw Error(ErrorKind::kSchema, "incompatible dimensions between layers " +
                                          std::to_string(i - 1) + " and " + std::to_string(i));
    }
  }
}

Mlp Mlp::glorot(const std::vector<int>& sizes, std::mt19937_64& rng) {
  if (sizes.size() < 2) throw Error(ErrorKind::kInvalidArgument, "mlp needs at least two sizes");
  std::vector<Dense> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    if (sizes[i] < 1 || sizes[i + 1] < 1) throw Error(ErrorKind::kInvalidArgument, "layer sizes must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(sizes[i] + sizes[i + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Dense d{Eigen::MatrixXd(sizes[i], sizes[i + 1]), Eigen::RowVectorXd::Zero(sizes[i + 1])};
    for (Eigen::Index r = 0; r < d.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.weight.cols(); ++c) d.weight(r, c) = dist(rng);
    }
    layers.push_back(std::move(d));
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::glorot(const std::vector<int>& sizes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return glorot(sizes, rng);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Tape* tape) const {
  if (x.cols() != input_width()) {
    throw Error(ErrorKind::kSchema, "input width " + std::to_string(x.cols()) + " != " +
                                        std::to_string(input_width()));
  }
  if (tape) {
    tape->inputs.clear();
    tape->pre_activations.clear();
    tape->outputs.clear();
  }
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Eigen::MatrixXd z = h * layers_[i].weight;
    z.rowwise() += layers_[i].bias;
    const bool hidden = i + 1 < layers_.size();
    Eigen::MatrixXd out = hidden ? Eigen::MatrixXd(z.array().tanh()) : z;
    if (tape) {
      tape->inputs.push_back(std::move(h));
      tape->pre_activations.push_back(std::move(z));
      tape->outputs.push_back(out);
    }
    h = std::move(out);
  }
  return h;
}

Gradients Mlp::backward(const Tape& tape, const Eigen::MatrixXd& output_grad) const {
  if (tape.inputs.size() != layers_.size()) throw Error(ErrorKind::kSchema, "tape does not match network");
  const auto& last = tape.outputs.back();
  if (output_grad.rows() != last.rows() || output_grad.cols() != last.cols()) {
    throw Error(ErrorKind::kSchema, "output gradient shape does not match tape");
  }
  Gradients g;
  g.layers.resize(layers_.size());
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size()) {
      delta.array() *= 1.0 - tape.outputs[k].array().square();
    }
    g.layers[k].weight.noalias() = tape.inputs[k].transpose() * delta;
    g.layers[k].bias = delta.colwise().sum();
    Eigen::MatrixXd upstream = delta * layers_[k].weight.transpose();
    delta = std::move(upstream);
  }
  g.input = std::move(delta);
  return g;
}

std::vector<int> Mlp::sizes() const {
  std::vector<int> s;
  if (layers_.empty()) return s;
  s.push_back(static_cast<int>(layers_.front().in()));
  for (const auto& l : layers_) s.push_back(static_cast<int>(l.out()));
  return s;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& l : layers_) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.in(), l.out()), Eigen::RowVectorXd::Zero(l.out())});
  }
  return g;
}

AdamState AdamState::for_model(const Mlp& net, AdamOptions options) {
  return AdamState{options, net.zero_gradients(), net.zero_gradients(), 0};
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state) {
  if (grads.layers.size() != net.layers().size() ||
      state.first_moment.layers.size() != net.layers().size()) {
    throw Error(ErrorKind::kSchema, "adam: shapes not congruent with network");
  }
  if (!grads.all_finite()) throw Error(ErrorKind::kNumeric, "adam: non-finite gradient");
  state.step += 1;
  const auto& o = state.options;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = o.beta1 * m + (1.0 - o.beta1) * g;
    v = o.beta2 * v + (1.0 - o.beta2) * g.cwiseProduct(g);
    param.array() -= o.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + o.epsilon);
  };
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    auto& layer = net.layers()[i];
    const auto& g = grads.layers[i];
    if (g.weight.rows() != layer.weight.rows() || g.weight.cols() != layer.weight.cols() ||
        g.bias.size() != layer.bias.size()) {
      throw Error(ErrorKind::kSchema, "adam: gradient shape mismatch in layer " + std::to_string(i));
    }
    update(layer.weight, g.weight, state.first_moment.layers[i].weight, state.second_moment.layers[i].weight);
    update(layer.bias, g.bias, state.first_moment.layers[i].bias, state.second_moment.layers[i].bias);
  }
  if (!net.all_finite()) throw Error(ErrorKind::kNumeric, "adam: parameters became non-finite");
}

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    std::vector<double> b(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back({{"weight", w}, {"bias", b}});
  }
  return {{"format", "discret2di.mlp"},
          {"version", 1},
          {"layer_sizes", net.sizes()},
          {"hidden_activation", "tanh"},
          {"layers", layers}};
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "discret2di.mlp" || doc.value("version", 0) != 1) {
    throw Error(ErrorKind::kSchema, "unsupported mlp document");
  }
  const auto sizes = doc.at("layer_sizes").get<std::vector<int>>();
  const auto& layers = doc.at("layers");
  if (sizes.size() != layers.size() + 1) throw Error(ErrorKind::kSchema, "layer count mismatch");
  std::vector<Dense> dense;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto w = layers[i].at("weight").get<std::vector<double>>();
    const auto b = layers[i].at("bias").get<std::vector<double>>();
    const int in = sizes[i];
    const int out = sizes[i + 1];
    if (w.size() != static_cast<std::size_t>(in) * static_cast<std::size_t>(out) ||
        b.size() != static_cast<std::size_t>(out)) {
      throw Error(ErrorKind::kSchema, "parameter array size mismatch in layer " + std::to_string(i));
    }
    Dense d{Eigen::MatrixXd(in, out), Eigen::RowVectorXd(out)};
    for (int r = 0; r < in; ++r) {
      for (int c = 0; c < out; ++c) d.weight(r, c) = w[static_cast<std::size_t>(r * out + c)];
    }
    for (int c = 0; c < out; ++c) d.bias(c) = b[static_cast<std::size_t>(c)];
    dense.push_back(std::move(d));
  }
  return Mlp(std::move(dense));
}

}  // namespace d2d::nn
