#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "glime/errors.hpp"
#include "glime/glasso.hpp"

namespace glime {

// Standardized partial-correlation adjacency: W_ij = -K_ij / sqrt(K_ii K_jj),
// zero diagonal. Lasso zeros in K stay exact zeros in W; display filtering
// happens only in edge_list / export.
struct PartialCorrelationNetwork {
  std::vector<std::string> node_names;  // features..., O1 last
  Eigen::MatrixXd W;

  Eigen::Index nodes() const { return W.rows(); }
  Eigen::Index output_index() const { return W.rows() - 1; }
};

struct Edge {
  Eigen::Index i = 0;
  Eigen::Index j = 0;  // i < j
  double weight = 0.0;
};

inline PartialCorrelationNetwork partial_correlations(const PrecisionEstimate& est,
                                                      const std::vector<std::string>& node_names) {
  const Eigen::MatrixXd& K = est.K;
  const Eigen::Index d = K.rows();
  require(static_cast<std::size_t>(d) == node_names.size(), errc::width_mismatch,
          "node name count does not match precision matrix size");
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(K(i, i) > 0.0))
      fail(errc::non_positive_diagonal,
           "K(" + std::to_string(i) + "," + std::to_string(i) + ") <= 0");

  const Eigen::VectorXd inv_sqrt = K.diagonal().array().rsqrt();
  PartialCorrelationNetwork net;
  net.node_names = node_names;
  net.W = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      // symmetrize K before standardizing; solver output is already
      // symmetric, so this is exact there
      const double kij = 0.5 * (K(i, j) + K(j, i));
      const double w = (kij == 0.0) ? 0.0 : -kij * inv_sqrt(i) * inv_sqrt(j);
      net.W(i, j) = w;
      net.W(j, i) = w;
    }
  }
  return net;
}

// Edges at or above the magnitude threshold, strongest first; ties resolve
// by (i, j) lexicographic order.
inline std::vector<Edge> edge_list(const PartialCorrelationNetwork& net,
                                   double min_abs_weight = 0.0) {
  require(min_abs_weight >= 0.0, errc::config_error, "edge threshold must be nonnegative");
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < net.nodes(); ++i)
    for (Eigen::Index j = i + 1; j < net.nodes(); ++j)
      if (net.W(i, j) != 0.0 && std::fabs(net.W(i, j)) >= min_abs_weight)
        edges.push_back({i, j, net.W(i, j)});
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    const double ma = std::fabs(a.weight), mb = std::fabs(b.weight);
    if (ma != mb) return ma > mb;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  return edges;
}

}  // namespace glime
