#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "discret2di/time_series.hpp"

namespace d2d {

// Full-covariance Gaussian mixture. Frames are standardized with
// `standardizer` (identity unless fitted with standardize = true) before
// every density evaluation.
struct GmmModel {
  std::vector<std::string> channels;
  Standardizer standardizer;
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;                     // [components x n]
  std::vector<Eigen::MatrixXd> covariances;  // n x n each

  int components() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(means.cols()); }
};

struct GmmOptions {
  int n_components = 7;
  std::uint64_t seed = 0;
  int max_iters = 200;
  double tol = 1e-6;        // on mean per-sample log-likelihood
  double reg_covar = 1e-6;  // added to every covariance diagonal
  bool standardize = false;
};

struct GmmFit {
  GmmModel model;
  std::vector<double> log_likelihood;  // mean per-sample, one entry per iteration
  int iterations = 0;
  bool converged = false;
  int empty_reinitializations = 0;
};

// Expectation-maximization with k-means++ seeding of the means.
GmmFit fit_em(const TimeSeries& data, const GmmOptions& options);

struct GmmAssignment {
  int component = 0;
  double log_likelihood = 0.0;  // log sum_k w_k N(x; mu_k, Sigma_k)
};

GmmAssignment gmm_assign(const GmmModel& model, const Eigen::VectorXd& frame);
std::vector<GmmAssignment> gmm_assign_batch(const GmmModel& model, const Eigen::MatrixXd& frames);

// Per-component log w_k + log N(x; mu_k, Sigma_k) for standardized rows.
Eigen::MatrixXd gmm_weighted_log_densities(const GmmModel& model, const Eigen::MatrixXd& x);

nlohmann::json to_json(const GmmModel& model);
GmmModel gmm_model_from_json(const nlohmann::json& doc);

}  // namespace d2d
