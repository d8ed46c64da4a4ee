#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glime/errors.hpp"
#include "glime/rng.hpp"
#include "glime/tabular.hpp"

namespace glime {

struct PerturbationConfig {
  int m = 5000;
  std::optional<double> kernel_width;  // empty = auto 0.75 * sqrt(p)
  double noise_scale = 1.0;
  std::uint64_t seed = 0;

  double resolved_width(Eigen::Index p) const {
    if (kernel_width) return *kernel_width;
    return 0.75 * std::sqrt(static_cast<double>(p));
  }
};

// The m perturbed feature rows plus the output column holding the
// black-box scores; node names are the feature names followed by O1.
struct LocalDataset {
  Eigen::MatrixXd data;                  // m x (p+1), scores last
  std::vector<std::string> column_names; // features..., "O1"

  Eigen::Index m() const { return data.rows(); }
  Eigen::Index nodes() const { return data.cols(); }
};

struct PerturbationSet {
  Eigen::VectorXd base_instance;
  Eigen::MatrixXd samples;  // m x p
  Eigen::VectorXd weights;  // in (0,1]
  Eigen::VectorXd scores;   // in [0,1]
};

namespace perturbation {

// Gaussian noise centered at the instance, per-feature scale
// noise_scale * training stdev. Row i, feature j draws from the counter
// stream at (seed, i, j): order-independent and reproducible.
inline Eigen::MatrixXd generate(const Eigen::VectorXd& instance, const FeatureStats& stats,
                                const PerturbationConfig& cfg) {
  if (instance.size() != stats.p())
    fail(errc::width_mismatch, "instance has " + std::to_string(instance.size()) +
                                   " features, stats have " + std::to_string(stats.p()));
  if (cfg.m < 1) fail(errc::config_error, "sample count must be positive");
  if (cfg.noise_scale <= 0.0) fail(errc::config_error, "noise scale must be positive");
  const Eigen::Index p = instance.size();
  Eigen::MatrixXd samples(cfg.m, p);
  for (Eigen::Index i = 0; i < cfg.m; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (stats.constant[static_cast<std::size_t>(j)]) {
        samples(i, j) = instance(j);
      } else {
        const double z = rng::normal(cfg.seed, static_cast<std::uint64_t>(i),
                                     static_cast<std::uint64_t>(j));
        samples(i, j) = instance(j) + cfg.noise_scale * stats.stdevs(j) * z;
      }
    }
  }
  return samples;
}

// weight_i = exp(-d_i^2 / width^2), d_i the Euclidean distance between the
// standardized instance and standardized sample (constant features
// contribute zero distance).
inline Eigen::VectorXd kernel_weights(const Eigen::VectorXd& instance,
                                      const Eigen::MatrixXd& samples, const FeatureStats& stats,
                                      double width) {
  if (width <= 0.0) fail(errc::zero_width, "kernel width must be positive");
  if (instance.size() != stats.p() || samples.cols() != instance.size())
    fail(errc::width_mismatch, "instance/samples/stats widths disagree");
  const Eigen::Index m = samples.rows(), p = samples.cols();
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double d2 = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (stats.constant[static_cast<std::size_t>(j)]) continue;
      const double diff = (samples(i, j) - instance(j)) / stats.stdevs(j);
      d2 += diff * diff;
    }
    w(i) = std::exp(-d2 / (width * width));
  }
  return w;
}

inline LocalDataset assemble_local(const Eigen::MatrixXd& samples, const Eigen::VectorXd& scores,
                                   const std::vector<std::string>& feature_names) {
  if (samples.rows() != scores.size())
    fail(errc::length_mismatch, std::to_string(samples.rows()) + " sample rows vs " +
                                    std::to_string(scores.size()) + " scores");
  if (static_cast<std::size_t>(samples.cols()) != feature_names.size())
    fail(errc::width_mismatch, "feature name count does not match sample width");
  LocalDataset local;
  local.data.resize(samples.rows(), samples.cols() + 1);
  local.data.leftCols(samples.cols()) = samples;
  local.data.col(samples.cols()) = scores;
  local.column_names = feature_names;
  local.column_names.push_back("O1");
  return local;
}

}  // namespace perturbation
}  // namespace glime
