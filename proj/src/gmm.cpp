#include "discret2di/gmm.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "discret2di/error.hpp"

namespace d2d {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& m) {
  Eigen::VectorXd max = m.rowwise().maxCoeff();
  return max.array() + (m.colwise() - max).array().exp().rowwise().sum().log();
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(k, x.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = x.row(first(rng));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2(pick);
        if (target <= 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

Eigen::MatrixXd weighted_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& r,
                                    const Eigen::RowVectorXd& mean, double nk, double reg) {
  Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.array().colwise() * r.array()).matrix().transpose() * centered / nk;
  cov = 0.5 * (cov + cov.transpose());
  cov.diagonal().array() += reg;
  return cov;
}

}  // namespace

Eigen::MatrixXd gmm_weighted_log_densities(const GmmModel& model, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const int k = model.components();
  const double d = static_cast<double>(model.input_dim());
  Eigen::MatrixXd out(n, k);
  for (int c = 0; c < k; ++c) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.covariances[static_cast<std::size_t>(c)]);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::kNumeric, "gmm: covariance of component " + std::to_string(c) +
                                           " is not positive definite");
    }
    const Eigen::MatrixXd& l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    Eigen::MatrixXd centered = (x.rowwise() - model.means.row(c)).transpose();
    Eigen::MatrixXd solved = llt.matrixL().solve(centered);
    Eigen::VectorXd maha = solved.colwise().squaredNorm().transpose();
    out.col(c) = (std::log(model.weights(c)) - 0.5 * (d * kLog2Pi + log_det) - 0.5 * maha.array()).matrix();
  }
  return out;
}

GmmFit fit_em(const TimeSeries& data, const GmmOptions& options) {
  const int k = options.n_components;
  if (k < 1) throw Error(ErrorKind::kInvalidArgument, "gmm: n_components must be >= 1");
  if (data.rows() <= static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::kInvalidArgument, "gmm: need more rows than components");
  }
  if (options.max_iters < 1 || !(options.reg_covar >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "gmm: bad iteration count or regularization");
  }
  GmmFit fit;
  GmmModel& m = fit.model;
  m.channels = data.channels();
  m.standardizer = options.standardize ? fit_standardizer(data) : Standardizer::identity(data.channels());
  const Eigen::MatrixXd x = m.standardizer.apply(data.values());
  const Eigen::Index n = x.rows();
  const Eigen::Index dim = x.cols();

  std::mt19937_64 rng(options.seed);
  const Eigen::MatrixXd centers = kmeans_plus_plus(x, k, rng);
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    (centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
    resp(i, best) = 1.0;
  }

  Eigen::RowVectorXd global_mean = x.colwise().mean();
  Eigen::MatrixXd global_cov =
      weighted_covariance(x, Eigen::VectorXd::Ones(n), global_mean, static_cast<double>(n), options.reg_covar);

  m.weights.resize(k);
  m.means.resize(k, dim);
  m.covariances.assign(static_cast<std::size_t>(k), Eigen::MatrixXd::Identity(dim, dim));
  Eigen::VectorXd last_point_ll = Eigen::VectorXd::Zero(n);

  for (int it = 0; it < options.max_iters; ++it) {
    // M-step.
    Eigen::VectorXd nk = resp.colwise().sum().transpose();
    for (int c = 0; c < k; ++c) {
      if (nk(c) < 10.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n)) {
        // Empty component: restart it on the worst explained point.
        Eigen::Index worst = 0;
        last_point_ll.minCoeff(&worst);
        m.means.row(c) = x.row(worst);
        m.covariances[static_cast<std::size_t>(c)] = global_cov;
        nk(c) = 1.0;
        ++fit.empty_reinitializations;
        continue;
      }
      m.means.row(c) = (resp.col(c).transpose() * x) / nk(c);
      m.covariances[static_cast<std::size_t>(c)] =
          weighted_covariance(x, resp.col(c), m.means.row(c), nk(c), options.reg_covar);
    }
    m.weights = nk / nk.sum();

    // E-step.
    Eigen::MatrixXd logd = gmm_weighted_log_densities(m, x);
    last_point_ll = log_sum_exp_rows(logd);
    resp = (logd.colwise() - last_point_ll).array().exp();
    const double ll = last_point_ll.mean();
    fit.log_likelihood.push_back(ll);
    fit.iterations = it + 1;
    if (it > 0 && std::abs(ll - fit.log_likelihood[fit.log_likelihood.size() - 2]) < options.tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

std::vector<GmmAssignment> gmm_assign_batch(const GmmModel& model, const Eigen::MatrixXd& frames) {
  if (frames.cols() != model.input_dim()) {
    throw Error(ErrorKind::kSchema, "gmm: frame width " + std::to_string(frames.cols()) +
                                        " != model width " + std::to_string(model.input_dim()));
  }
  std::vector<GmmAssignment> out(static_cast<std::size_t>(frames.rows()));
  if (frames.rows() == 0) return out;
  Eigen::MatrixXd logd = gmm_weighted_log_densities(model, model.standardizer.apply(frames));
  Eigen::VectorXd ll = log_sum_exp_rows(logd);
  for (Eigen::Index i = 0; i < frames.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logd.cols(); ++c) {
      if (logd(i, c) > logd(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = {static_cast<int>(best), ll(i)};
  }
  return out;
}

GmmAssignment gmm_assign(const GmmModel& model, const Eigen::VectorXd& frame) {
  return gmm_assign_batch(model, frame.transpose()).front();
}

nlohmann::json to_json(const GmmModel& m) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json means = nlohmann::json::array();
  for (Eigen::Index c = 0; c < m.means.rows(); ++c) means.push_back(vec(m.means.row(c).transpose()));
  nlohmann::json covs = nlohmann::json::array();
  for (const auto& cov : m.covariances) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < cov.rows(); ++r) rows.push_back(vec(cov.row(r).transpose()));
    covs.push_back(rows);
  }
  return {{"format", "discret2di.gmm"},
          {"version", 1},
          {"channels", m.channels},
          {"standardizer", {{"mean", vec(m.standardizer.mean)}, {"stddev", vec(m.standardizer.stddev)}}},
          {"weights", vec(m.weights)},
          {"means", means},
          {"covariances", covs}};
}

GmmModel gmm_model_from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "discret2di.gmm" || doc.value("version", 0) != 1) {
    throw Error(ErrorKind::kSchema, "unsupported gmm document");
  }
  auto to_vec = [](const nlohmann::json& j) {
    auto v = j.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  GmmModel m;
  m.channels = doc.at("channels").get<std::vector<std::string>>();
  m.standardizer.channels = m.channels;
  m.standardizer.mean = to_vec(doc.at("standardizer").at("mean"));
  m.standardizer.stddev = to_vec(doc.at("standardizer").at("stddev"));
  m.weights = to_vec(doc.at("weights"));
  const auto k = m.weights.size();
  const auto dim = static_cast<Eigen::Index>(m.channels.size());
  m.means.resize(k, dim);
  for (Eigen::Index c = 0; c < k; ++c) m.means.row(c) = to_vec(doc.at("means").at(static_cast<std::size_t>(c))).transpose();
  for (const auto& cov : doc.at("covariances")) {
    Eigen::MatrixXd mat(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) mat.row(r) = to_vec(cov.at(static_cast<std::size_t>(r))).transpose();
    m.covariances.push_back(mat);
  }
  if (static_cast<Eigen::Index>(m.covariances.size()) != k) throw Error(ErrorKind::kSchema, "gmm: covariance count mismatch");
  return m;
}

}  // namespace d2d
