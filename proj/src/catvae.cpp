#include "discret2di/catvae.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "discret2di/error.hpp"

namespace d2d {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

struct ForwardCache {
  nn::Tape encoder, head, decoder, mean, logvar_tape;
  Eigen::MatrixXd logits;
  Eigen::MatrixXd relaxed;  // decoder input
  Eigen::MatrixXd mu;
  Eigen::MatrixXd logvar_raw;
  Eigen::MatrixXd logvar;
};

void check_batch(const CatVaeModel& model, const Eigen::MatrixXd& batch) {
  if (batch.cols() != model.input_dim()) {
    throw Error(ErrorKind::kSchema, "batch width " + std::to_string(batch.cols()) +
                                        " != model input width " + std::to_string(model.input_dim()));
  }
}

Eigen::MatrixXd clamp(const Eigen::MatrixXd& m, double lo, double hi) {
  return m.cwiseMax(lo).cwiseMin(hi);
}

// Runs decoder and heads on the latent code `z`.
void decode(const CatVaeModel& model, const Eigen::MatrixXd& z, ForwardCache& cache, bool record) {
  Eigen::MatrixXd d = model.decoder.forward(z, record ? &cache.decoder : nullptr);
  cache.mu = model.mean_head.forward(d, record ? &cache.mean : nullptr);
  cache.logvar_raw = model.logvar_head.forward(d, record ? &cache.logvar_tape : nullptr);
  cache.logvar = clamp(cache.logvar_raw, model.config.logvar_min, model.config.logvar_max);
}

ForwardCache forward_relaxed(const CatVaeModel& model, const Eigen::MatrixXd& batch,
                             const Eigen::MatrixXd& gumbel, bool record) {
  check_batch(model, batch);
  if (gumbel.rows() != batch.rows() || gumbel.cols() != model.categories()) {
    throw Error(ErrorKind::kSchema, "gumbel noise shape mismatch");
  }
  ForwardCache cache;
  Eigen::MatrixXd h = model.encoder.forward(batch, record ? &cache.encoder : nullptr);
  cache.logits = model.logits_head.forward(h, record ? &cache.head : nullptr);
  cache.relaxed = softmax_rows((cache.logits + gumbel) / model.config.temperature);
  decode(model, cache.relaxed, cache, record);
  return cache;
}

ElboTerms terms_from_cache(const CatVaeModel& model, const Eigen::MatrixXd& batch,
                           const ForwardCache& cache, Eigen::MatrixXd* log_p_out = nullptr) {
  const double b = static_cast<double>(batch.rows());
  const Eigen::ArrayXXd diff = (batch - cache.mu).array();
  const Eigen::ArrayXXd inv_var = (-cache.logvar.array()).exp();
  const double recon =
      (-0.5 * kLog2Pi - 0.5 * cache.logvar.array() - 0.5 * diff.square() * inv_var).sum() / b;
  Eigen::MatrixXd log_p = log_softmax_rows(cache.logits);
  const Eigen::ArrayXXd p = log_p.array().exp();
  const double log_k = std::log(static_cast<double>(model.categories()));
  const double kl = (p * log_p.array()).sum() / b + log_k;
  if (log_p_out) *log_p_out = std::move(log_p);
  ElboTerms t;
  t.reconstruction = recon;
  t.kl = kl;
  t.loss = -recon + model.config.beta * kl;
  if (!std::isfinite(t.loss)) throw Error(ErrorKind::kNumeric, "non-finite ELBO");
  return t;
}

}  // namespace

void CatVaeConfig::validate() const {
  if (channels.empty()) throw Error(ErrorKind::kInvalidArgument, "catvae: no input channels");
  if (categories < 2) throw Error(ErrorKind::kInvalidArgument, "catvae: categories must be >= 2");
  if (!(temperature > 0.0)) throw Error(ErrorKind::kInvalidArgument, "catvae: temperature must be > 0");
  if (!(beta > 0.0)) throw Error(ErrorKind::kInvalidArgument, "catvae: beta must be > 0");
  if (encoder_layers.size() < 2 || encoder_layers.front() != input_dim()) {
    throw Error(ErrorKind::kInvalidArgument, "catvae: encoder input width must equal channel count");
  }
  if (decoder_layers.size() < 2 || decoder_layers.front() != categories) {
    throw Error(ErrorKind::kInvalidArgument, "catvae: decoder input width must equal categories");
  }
  if (batch_size < 1 || max_epochs < 1 || patience < 1) {
    throw Error(ErrorKind::kInvalidArgument, "catvae: batch size, epochs and patience must be >= 1");
  }
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "catvae: learning rate must be >= 0");
  if (!(logvar_min < logvar_max)) throw Error(ErrorKind::kInvalidArgument, "catvae: bad log-variance bounds");
}

CatVaeConfig CatVaeConfig::tank_defaults() {
  CatVaeConfig c;
  c.channels = {"h1", "h2", "h3"};
  return c;
}

CatVaeConfig CatVaeConfig::with_shape(std::vector<std::string> channels, int categories) {
  CatVaeConfig c;
  c.encoder_layers.front() = static_cast<int>(channels.size());
  c.decoder_layers.front() = categories;
  c.channels = std::move(channels);
  c.categories = categories;
  return c;
}

nlohmann::json to_json(const CatVaeConfig& c) {
  return {{"channels", c.channels},         {"categories", c.categories},
          {"temperature", c.temperature},   {"beta", c.beta},
          {"encoder_layers", c.encoder_layers}, {"decoder_layers", c.decoder_layers},
          {"batch_size", c.batch_size},     {"max_epochs", c.max_epochs},
          {"patience", c.patience},         {"learning_rate", c.learning_rate},
          {"logvar_min", c.logvar_min},     {"logvar_max", c.logvar_max},
          {"seed", c.seed}};
}

CatVaeConfig catvae_config_from_json(const nlohmann::json& doc, CatVaeConfig c) {
  if (doc.contains("channels")) c.channels = doc.at("channels").get<std::vector<std::string>>();
  c.categories = doc.value("categories", c.categories);
  c.temperature = doc.value("temperature", c.temperature);
  c.beta = doc.value("beta", c.beta);
  if (doc.contains("encoder_layers")) {
    c.encoder_layers = doc.at("encoder_layers").get<std::vector<int>>();
  } else if (!c.encoder_layers.empty()) {
    c.encoder_layers.front() = c.input_dim();
  }
  if (doc.contains("decoder_layers")) {
    c.decoder_layers = doc.at("decoder_layers").get<std::vector<int>>();
  } else if (!c.decoder_layers.empty()) {
    c.decoder_layers.front() = c.categories;
  }
  c.batch_size = doc.value("batch_size", c.batch_size);
  c.max_epochs = doc.value("max_epochs", c.max_epochs);
  c.patience = doc.value("patience", c.patience);
  c.learning_rate = doc.value("learning_rate", c.learning_rate);
  c.logvar_min = doc.value("logvar_min", c.logvar_min);
  c.logvar_max = doc.value("logvar_max", c.logvar_max);
  c.seed = doc.value("seed", c.seed);
  c.validate();
  return c;
}

CatVaeModel CatVaeModel::initialize(const CatVaeConfig& config, Standardizer standardizer) {
  config.validate();
  if (standardizer.channels != config.channels) {
    throw Error(ErrorKind::kSchema, "standardizer channels differ from model channels");
  }
  std::mt19937_64 rng(config.seed);
  CatVaeModel m;
  m.config = config;
  m.standardizer = std::move(standardizer);
  m.encoder = nn::Mlp::glorot(config.encoder_layers, rng);
  m.logits_head = nn::Mlp::glorot({config.encoder_layers.back(), config.categories}, rng);
  m.decoder = nn::Mlp::glorot(config.decoder_layers, rng);
  m.mean_head = nn::Mlp::glorot({config.decoder_layers.back(), config.input_dim()}, rng);
  m.logvar_head = nn::Mlp::glorot({config.decoder_layers.back(), config.input_dim()}, rng);
  return m;
}

nlohmann::json to_json(const CatVaeModel& m) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"format", "discret2di.catvae"},
          {"version", 1},
          {"config", to_json(m.config)},
          {"standardizer",
           {{"channels", m.standardizer.channels},
            {"mean", vec(m.standardizer.mean)},
            {"stddev", vec(m.standardizer.stddev)}}},
          {"encoder", nn::to_json(m.encoder)},
          {"logits_head", nn::to_json(m.logits_head)},
          {"decoder", nn::to_json(m.decoder)},
          {"mean_head", nn::to_json(m.mean_head)},
          {"logvar_head", nn::to_json(m.logvar_head)}};
}

CatVaeModel catvae_model_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "discret2di.catvae" || doc.value("version", 0) != 1) {
    throw Error(ErrorKind::kSchema, "unsupported catvae document");
  }
  CatVaeModel m;
  m.config = catvae_config_from_json(doc.at("config"));
  const auto& s = doc.at("standardizer");
  auto mean = s.at("mean").get<std::vector<double>>();
  auto sd = s.at("stddev").get<std::vector<double>>();
  m.standardizer.channels = s.at("channels").get<std::vector<std::string>>();
  m.standardizer.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  m.standardizer.stddev = Eigen::Map<Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  m.encoder = nn::mlp_from_json(doc.at("encoder"));
  m.logits_head = nn::mlp_from_json(doc.at("logits_head"));
  m.decoder = nn::mlp_from_json(doc.at("decoder"));
  m.mean_head = nn::mlp_from_json(doc.at("mean_head"));
  m.logvar_head = nn::mlp_from_json(doc.at("logvar_head"));
  if (m.encoder.input_width() != m.config.input_dim() ||
      m.logits_head.output_width() != m.config.categories ||
      m.decoder.input_width() != m.config.categories ||
      m.mean_head.output_width() != m.config.input_dim() ||
      m.logvar_head.output_width() != m.config.input_dim() ||
      m.standardizer.mean.size() != m.config.input_dim()) {
    throw Error(ErrorKind::kSchema, "catvae document has inconsistent shapes");
  }
  return m;
}

Eigen::MatrixXd sample_gumbel(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      // Uniform in the open interval (0, 1) from the top 53 bits.
      const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
      g(i, j) = -std::log(-std::log(u));
    }
  }
  return g;
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& x) {
  Eigen::VectorXd max = x.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = x.colwise() - max;
  Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  return shifted.colwise() - lse;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd e = (x.colwise() - x.rowwise().maxCoeff()).array().exp();
  Eigen::VectorXd sums = e.rowwise().sum();
  return e.array().colwise() / sums.array();
}

Eigen::VectorXd gumbel_softmax_sample(const Eigen::VectorXd& logits, double temperature,
                                      std::mt19937_64& rng) {
  if (!(temperature > 0.0)) throw Error(ErrorKind::kInvalidArgument, "temperature must be > 0");
  Eigen::MatrixXd g = sample_gumbel(1, logits.size(), rng);
  Eigen::MatrixXd u = (logits.transpose() + g) / temperature;
  return softmax_rows(u).row(0).transpose();
}

double categorical_kl_uniform(const Eigen::VectorXd& logits) {
  Eigen::MatrixXd row = logits.transpose();
  Eigen::ArrayXXd log_p = log_softmax_rows(row).array();
  return (log_p.exp() * log_p).sum() + std::log(static_cast<double>(logits.size()));
}

double gaussian_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& logvar) {
  const Eigen::ArrayXd diff = (x - mean).array();
  return (-0.5 * kLog2Pi - 0.5 * logvar.array() - 0.5 * diff.square() * (-logvar.array()).exp()).sum();
}

ElboTerms elbo_loss(const CatVaeModel& model, const Eigen::MatrixXd& batch,
                    const Eigen::MatrixXd& gumbel_noise) {
  ForwardCache cache = forward_relaxed(model, batch, gumbel_noise, false);
  return terms_from_cache(model, batch, cache);
}

ElboTerms elbo_loss(const CatVaeModel& model, const Eigen::MatrixXd& batch, std::mt19937_64& rng) {
  return elbo_loss(model, batch, sample_gumbel(batch.rows(), model.categories(), rng));
}

ElboGradients elbo_gradients(const CatVaeModel& model, const Eigen::MatrixXd& batch,
                             const Eigen::MatrixXd& gumbel_noise) {
  ForwardCache c = forward_relaxed(model, batch, gumbel_noise, true);
  Eigen::MatrixXd log_p;
  ElboGradients out;
  out.terms = terms_from_cache(model, batch, c, &log_p);

  const double b = static_cast<double>(batch.rows());
  const double tau = model.config.temperature;
  const double beta = model.config.beta;

  const Eigen::ArrayXXd inv_var = (-c.logvar.array()).exp();
  const Eigen::ArrayXXd diff = (batch - c.mu).array();
  Eigen::MatrixXd d_mu = -(diff * inv_var) / b;
  Eigen::ArrayXXd inside = ((c.logvar_raw.array() > model.config.logvar_min) &&
                            (c.logvar_raw.array() < model.config.logvar_max)).cast<double>();
  Eigen::MatrixXd d_logvar = (-(-0.5 + 0.5 * diff.square() * inv_var) / b * inside).matrix();

  out.mean_head = model.mean_head.backward(c.mean, d_mu);
  out.logvar_head = model.logvar_head.backward(c.logvar_tape, d_logvar);
  Eigen::MatrixXd d_dec_out = out.mean_head.input + out.logvar_head.input;
  out.decoder = model.decoder.backward(c.decoder, d_dec_out);

  const Eigen::MatrixXd& y = c.relaxed;
  const Eigen::MatrixXd& dy = out.decoder.input;
  Eigen::VectorXd y_dot_dy = (y.array() * dy.array()).rowwise().sum();
  Eigen::MatrixXd d_u = y.array() * (dy.colwise() - y_dot_dy).array();

  const Eigen::ArrayXXd p = log_p.array().exp();
  Eigen::VectorXd p_dot_logp = (p * log_p.array()).rowwise().sum();
  Eigen::MatrixXd d_kl = (p * (log_p.colwise() - p_dot_logp).array()).matrix() * (beta / b);

  Eigen::MatrixXd d_logits = d_u / tau + d_kl;
  out.logits_head = model.logits_head.backward(c.head, d_logits);
  out.encoder = model.encoder.backward(c.encoder, out.logits_head.input);
  return out;
}

int argmax(const Eigen::VectorXd& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

std::vector<LatentResult> infer_batch(const CatVaeModel& model, const Eigen::MatrixXd& frames) {
  check_batch(model, frames);
  std::vector<LatentResult> out(static_cast<std::size_t>(frames.rows()));
  if (frames.rows() == 0) return out;
  const Eigen::MatrixXd x = model.standardizer.apply(frames);
  Eigen::MatrixXd logits = model.logits_head.forward(model.encoder.forward(x));
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(x.rows(), model.categories());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int k = argmax(logits.row(i).transpose());
    onehot(i, k) = 1.0;
    out[static_cast<std::size_t>(i)].category = k;
    out[static_cast<std::size_t>(i)].logits = logits.row(i).transpose();
  }
  ForwardCache cache;
  decode(model, onehot, cache, false);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out[static_cast<std::size_t>(i)].log_likelihood = gaussian_log_density(
        x.row(i).transpose(), cache.mu.row(i).transpose(), cache.logvar.row(i).transpose());
  }
  return out;
}

LatentResult infer(const CatVaeModel& model, const Eigen::VectorXd& frame) {
  if (frame.size() != model.input_dim()) {
    throw Error(ErrorKind::kSchema, "frame width " + std::to_string(frame.size()) +
                                        " != model input width " + std::to_string(model.input_dim()));
  }
  return infer_batch(model, frame.transpose()).front();
}

DecodedCategory decode_category(const CatVaeModel& model, int category) {
  if (category < 0 || category >= model.categories()) {
    throw Error(ErrorKind::kInvalidArgument, "category out of range");
  }
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(1, model.categories());
  onehot(0, category) = 1.0;
  ForwardCache cache;
  decode(model, onehot, cache, false);
  DecodedCategory d;
  d.mean = model.standardizer.invert(cache.mu).row(0).transpose();
  d.stddev = (0.5 * cache.logvar.row(0).transpose().array()).exp().matrix().cwiseProduct(
      model.standardizer.stddev);
  return d;
}

TrainResult train_catvae(const CatVaeConfig& config, const TimeSeries& train,
                         const TimeSeries& validation, const EpochCallback& on_epoch) {
  config.validate();
  const TimeSeries train_sel = train.select_channels(config.channels);
  const TimeSeries val_sel = validation.select_channels(config.channels);
  if (train_sel.rows() < 2 || val_sel.rows() < 1) {
    throw Error(ErrorKind::kInvalidArgument, "catvae: training needs >= 2 train rows and >= 1 validation row");
  }
  Standardizer standardizer = fit_standardizer(train_sel);
  const Eigen::MatrixXd x_train = standardizer.apply(train_sel.values());
  const Eigen::MatrixXd x_val = standardizer.apply(val_sel.values());

  CatVaeModel model = CatVaeModel::initialize(config, standardizer);
  nn::AdamOptions adam{config.learning_rate, 0.9, 0.999, 1e-8};
  auto s_enc = nn::AdamState::for_model(model.encoder, adam);
  auto s_head = nn::AdamState::for_model(model.logits_head, adam);
  auto s_dec = nn::AdamState::for_model(model.decoder, adam);
  auto s_mean = nn::AdamState::for_model(model.mean_head, adam);
  auto s_lv = nn::AdamState::for_model(model.logvar_head, adam);

  // Separate streams: parameters, batch order + training noise, validation noise.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 val_rng(config.seed ^ 0xc2b2ae3d27d4eb4fULL);
  const Eigen::MatrixXd val_noise = sample_gumbel(x_val.rows(), config.categories, val_rng);

  TrainResult result{model, {}};
  result.history.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x_train.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  int stagnant = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      Eigen::MatrixXd batch(static_cast<Eigen::Index>(end - start), x_train.cols());
      for (std::size_t i = start; i < end; ++i) batch.row(static_cast<Eigen::Index>(i - start)) = x_train.row(order[i]);
      const Eigen::MatrixXd noise = sample_gumbel(batch.rows(), config.categories, rng);
      ElboGradients g;
      try {
        g = elbo_gradients(model, batch, noise);
        nn::adam_step(model.encoder, g.encoder, s_enc);
        nn::adam_step(model.logits_head, g.logits_head, s_head);
        nn::adam_step(model.decoder, g.decoder, s_dec);
        nn::adam_step(model.mean_head, g.mean_head, s_mean);
        nn::adam_step(model.logvar_head, g.logvar_head, s_lv);
      } catch (const Error& e) {
        throw Error(ErrorKind::kNumeric, "catvae training diverged at epoch " +
                                             std::to_string(epoch + 1) + ": " + e.what());
      }
      loss_sum += g.terms.loss * static_cast<double>(batch.rows());
    }
    const double train_loss = loss_sum / static_cast<double>(order.size());
    double val_loss = 0.0;
    try {
      val_loss = elbo_loss(model, x_val, val_noise).loss;
    } catch (const Error& e) {
      throw Error(ErrorKind::kNumeric, "catvae validation diverged at epoch " +
                                           std::to_string(epoch + 1) + ": " + e.what());
    }
    result.history.train_loss.push_back(train_loss);
    result.history.val_loss.push_back(val_loss);
    result.history.epochs_run = epoch + 1;
    if (on_epoch) on_epoch(epoch, train_loss, val_loss);

    if (val_loss < result.history.best_val_loss) {
      result.history.best_val_loss = val_loss;
      result.history.best_epoch = epoch;
      result.model = model;
      stagnant = 0;
    } else if (++stagnant >= config.patience) {
      result.history.stopped_early = true;
      break;
    }
  }
  return result;
}

}  // namespace d2d
