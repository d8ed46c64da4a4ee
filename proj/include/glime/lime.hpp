#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "glime/errors.hpp"
#include "glime/explanation.hpp"
#include "glime/tabular.hpp"

namespace glime {

struct SurrogateConfig {
  double ridge = 1e-3;  // l2 penalty on the slope coefficients; 0 is allowed
};

// A linear model of the black-box score over standardized features, fit by
// kernel-weighted least squares around one instance.
struct SurrogateFit {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;  // one per feature, standardized scale
  double ridge = 0.0;
};

// Closed-form weighted ridge: center features and scores by their weighted
// means (so the intercept is unpenalized), then solve the penalized normal
// equations. Features that were constant in training standardize to zero
// and come out with an exactly zero coefficient.
inline SurrogateFit fit_surrogate(const Eigen::MatrixXd& samples, const Eigen::VectorXd& scores,
                                  const Eigen::VectorXd& weights, const FeatureStats& stats,
                                  const SurrogateConfig& cfg = {}) {
  const Eigen::Index m = samples.rows(), p = samples.cols();
  require(scores.size() == m && weights.size() == m, errc::length_mismatch,
          "samples, scores, and weights differ in length");
  require(stats.means.size() == p, errc::width_mismatch,
          "training statistics do not match the sample width");
  require(m >= 2, errc::too_few_samples, "need at least two weighted samples");
  require(cfg.ridge >= 0.0, errc::config_error, "ridge penalty must be nonnegative");
  require((weights.array() >= 0.0).all(), errc::config_error, "weights must be nonnegative");
  const double wsum = weights.sum();
  require(wsum > 0.0, errc::config_error, "weights sum to zero");

  const Eigen::VectorXd w = weights / wsum;
  Eigen::MatrixXd Z(m, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (stats.stdevs(j) > 0.0)
      Z.col(j) = (samples.col(j).array() - stats.means(j)) / stats.stdevs(j);
    else
      Z.col(j).setZero();
  }

  const Eigen::VectorXd zbar = Z.transpose() * w;
  const double ybar = scores.dot(w);
  Z.rowwise() -= zbar.transpose();
  const Eigen::VectorXd yc = scores - Eigen::VectorXd::Constant(m, ybar);

  const Eigen::MatrixXd Zw = w.asDiagonal() * Z;
  Eigen::MatrixXd A = Z.transpose() * Zw;
  A.diagonal().array() += cfg.ridge;
  const Eigen::VectorXd b = Zw.transpose() * yc;

  SurrogateFit fit;
  fit.ridge = cfg.ridge;
  if (cfg.ridge == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    require(lu.isInvertible(), errc::singular_system,
            "unpenalized normal equations are singular");
    fit.coefficients = lu.solve(b);
  } else {
    fit.coefficients = Eigen::LDLT<Eigen::MatrixXd>(A).solve(b);
  }
  for (Eigen::Index j = 0; j < p; ++j)
    if (stats.stdevs(j) <= 0.0) fit.coefficients(j) = 0.0;
  fit.intercept = ybar - zbar.dot(fit.coefficients);
  return fit;
}

// Same ranking convention as the network ranking: descending |coefficient|,
// ties to the lower index, optional zero-coefficient tail in index order.
inline FeatureRanking rank_surrogate(const SurrogateFit& fit,
                                     const std::vector<std::string>& feature_names,
                                     bool padded = false) {
  const Eigen::Index p = fit.coefficients.size();
  require(static_cast<Eigen::Index>(feature_names.size()) == p, errc::width_mismatch,
          "feature names do not match the coefficient count");
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < p; ++j)
    if (fit.coefficients(j) != 0.0) idx.push_back(j);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::fabs(fit.coefficients(a)), mb = std::fabs(fit.coefficients(b));
    if (ma != mb) return ma > mb;
    return a < b;
  });
  FeatureRanking ranking;
  ranking.padded = padded;
  for (Eigen::Index j : idx)
    ranking.entries.push_back({feature_names[static_cast<std::size_t>(j)], fit.coefficients(j)});
  if (padded)
    for (Eigen::Index j = 0; j < p; ++j)
      if (fit.coefficients(j) == 0.0)
        ranking.entries.push_back({feature_names[static_cast<std::size_t>(j)], 0.0});
  return ranking;
}

}  // namespace glime
