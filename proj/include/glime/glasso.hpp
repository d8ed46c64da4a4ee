#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "glime/errors.hpp"
#include "glime/perturbation.hpp"

namespace glime {

// Sample matrix in correlation form plus the effective sample size implied
// by the kernel weights, (sum w)^2 / sum w^2.
struct CovarianceMatrix {
  Eigen::MatrixXd S;
  double n_effective = 0.0;

  Eigen::Index nodes() const { return S.rows(); }
};

struct PrecisionEstimate {
  Eigen::MatrixXd K;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;                 // log det K - tr(SK) - lambda * penalized |K|_1
  double dual_gap = 0.0;
  std::vector<double> objective_path;     // objective after each outer sweep (index 0 = init)
};

struct EbicEntry {
  double lambda = 0.0;
  double ebic = 0.0;
  int edges = 0;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  bool selected = false;
};

struct EbicTrace {
  std::vector<EbicEntry> entries;  // sorted by lambda descending
  double gamma = 0.5;
  double n = 0.0;
  int p_nodes = 0;
};

struct GlassoResult {
  PrecisionEstimate selected;
  EbicTrace trace;
  CovarianceMatrix covariance;
  std::vector<std::pair<double, std::string>> failures;  // (lambda, reason)
};

struct LambdaGrid {
  std::vector<double> values;  // descending
  bool all_zero_offdiag = false;
};

struct GlassoOptions {
  bool penalize_diagonal = false;  // true restores the full |K|_1 penalty
  double inner_tol = 1e-11;
  int inner_max_sweeps = 1000;
};

constexpr double kEdgeEps = 1e-8;

// ---------------------------------------------------------------------------
// weighted correlation

inline CovarianceMatrix weighted_correlation(const LocalDataset& local,
                                             const Eigen::VectorXd& weights) {
  const Eigen::Index m = local.m(), d = local.nodes();
  if (weights.size() != m)
    fail(errc::length_mismatch, std::to_string(weights.size()) + " weights for " +
                                    std::to_string(m) + " rows");
  const double wsum = weights.sum();
  const double wsq = weights.squaredNorm();
  require(wsum > 0.0 && std::isfinite(wsum), errc::too_few_samples, "weights sum to zero");
  const double n_eff = wsum * wsum / wsq;
  if (n_eff <= static_cast<double>(d))
    fail(errc::too_few_samples, "effective sample size " + std::to_string(n_eff) +
                                    " <= node count " + std::to_string(d));

  const Eigen::VectorXd wn = weights / wsum;
  const Eigen::VectorXd mu = local.data.transpose() * wn;
  Eigen::MatrixXd centered = local.data.rowwise() - mu.transpose();
  Eigen::MatrixXd C = centered.transpose() * wn.asDiagonal() * centered;

  std::vector<bool> constant(static_cast<std::size_t>(d), false);
  for (Eigen::Index j = 0; j < d; ++j)
    constant[static_cast<std::size_t>(j)] =
        local.data.col(j).minCoeff() == local.data.col(j).maxCoeff();

  Eigen::VectorXd scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (constant[static_cast<std::size_t>(j)]) {
      scale(j) = 0.0;
      continue;
    }
    if (!(C(j, j) > 0.0))
      fail(errc::degenerate_column, "column '" + local.column_names[static_cast<std::size_t>(j)] +
                                        "' has zero weighted variance");
    scale(j) = 1.0 / std::sqrt(C(j, j));
  }

  CovarianceMatrix out;
  out.n_effective = n_eff;
  out.S = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      double r = 0.0;
      if (!constant[static_cast<std::size_t>(i)] && !constant[static_cast<std::size_t>(j)])
        r = std::clamp(C(i, j) * scale(i) * scale(j), -1.0, 1.0);
      out.S(i, j) = r;
      out.S(j, i) = r;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// lambda grid

// Log-spaced path from lambda_max = max off-diagonal |S_ij| (empty graph)
// down to R * lambda_max.
inline LambdaGrid lambda_grid(const CovarianceMatrix& cov, int count = 100, double ratio = 0.01) {
  require(count >= 2, errc::config_error, "grid count must be >= 2");
  require(ratio > 0.0 && ratio < 1.0, errc::config_error, "grid ratio must lie in (0,1)");
  const Eigen::Index d = cov.nodes();
  double lmax = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) lmax = std::max(lmax, std::fabs(cov.S(i, j)));
  LambdaGrid grid;
  if (lmax == 0.0) {
    grid.values = {0.0};
    grid.all_zero_offdiag = true;
    return grid;
  }
  grid.values.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(count - 1);
    grid.values.push_back(lmax * std::pow(ratio, t));
  }
  return grid;
}

// ---------------------------------------------------------------------------
// solver

namespace detail {

inline double penalized_l1(const Eigen::MatrixXd& K, bool penalize_diagonal) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < K.rows(); ++i)
    for (Eigen::Index j = 0; j < K.cols(); ++j)
      if (i != j || penalize_diagonal) s += std::fabs(K(i, j));
  return s;
}

inline double log_det_pd(const Eigen::MatrixXd& K) {
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success) fail(errc::not_pd, "matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Eq-style objective, the quantity the solver maximizes.
inline double glasso_objective(const Eigen::MatrixXd& K, const Eigen::MatrixXd& S, double lambda,
                               bool penalize_diagonal) {
  return log_det_pd(K) - S.cwiseProduct(K).sum() - lambda * penalized_l1(K, penalize_diagonal);
}

// If the smallest eigenvalue dips below 1e-8, add 1e-6 * I and renormalize
// the diagonal back to one.
inline Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() >= 1e-8) return S;
  Eigen::MatrixXd repaired = S + 1e-6 * Eigen::MatrixXd::Identity(S.rows(), S.cols());
  const Eigen::VectorXd inv_sqrt = repaired.diagonal().array().rsqrt();
  repaired = inv_sqrt.asDiagonal() * repaired * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(repaired, Eigen::EigenvaluesOnly);
  if (check.eigenvalues().minCoeff() <= 0.0)
    fail(errc::not_pd, "input matrix could not be repaired to positive definite");
  return repaired;
}

}  // namespace detail

// Block coordinate descent over columns on the precision matrix itself.
// For column j with the rest of K fixed, the exact block minimizer solves a
// lasso in the off-diagonal entries,
//
//   min_u  1/2 s~_jj u' B u + s_1j' u + lambda |u|_1,   B = (K_11)^{-1},
//
// (by coordinate descent) and closes the block with k_jj = u'Bu + 1/s~_jj,
// where s~_jj = S_jj plus lambda when the diagonal is penalized. Exact
// block minimization makes the objective monotone across sweeps; K stays
// positive definite because each update keeps the Schur complement at
// 1/s~_jj > 0. Convergence is declared on the duality gap
// tr(SK) - d + lambda * |K|_1(penalized).
inline PrecisionEstimate solve(const CovarianceMatrix& cov, double lambda, double tol = 1e-7,
                               int max_iter = 200, const GlassoOptions& opt = {},
                               const Eigen::MatrixXd* warm_start = nullptr) {
  require(lambda >= 0.0, errc::config_error, "lambda must be nonnegative");
  require(tol > 0.0 && max_iter > 0, errc::config_error, "tol and max_iter must be positive");
  const Eigen::Index d = cov.nodes();
  const Eigen::MatrixXd S = detail::repair_correlation(cov.S);

  Eigen::VectorXd s_tilde = S.diagonal();
  if (opt.penalize_diagonal) s_tilde.array() += lambda;

  PrecisionEstimate est;
  est.lambda = lambda;
  if (warm_start != nullptr) {
    require(warm_start->rows() == d && warm_start->cols() == d, errc::width_mismatch,
            "warm start dimension mismatch");
    est.K = *warm_start;
  } else {
    est.K = Eigen::MatrixXd::Zero(d, d);
    est.K.diagonal() = s_tilde.cwiseInverse();
  }
  Eigen::MatrixXd& K = est.K;

  est.objective_path.push_back(detail::glasso_objective(K, S, lambda, opt.penalize_diagonal));

  Eigen::MatrixXd W(d, d);       // K^{-1}, refreshed each sweep
  Eigen::MatrixXd B(d - 1, d - 1);
  Eigen::VectorXd u(d - 1), s12(d - 1), Bu(d - 1);
  std::vector<Eigen::Index> others(static_cast<std::size_t>(d - 1));

  for (int sweep = 1; sweep <= max_iter; ++sweep) {
    W = Eigen::LLT<Eigen::MatrixXd>(K).solve(Eigen::MatrixXd::Identity(d, d));

    for (Eigen::Index j = 0; j < d; ++j) {
      Eigen::Index t = 0;
      for (Eigen::Index i = 0; i < d; ++i)
        if (i != j) others[static_cast<std::size_t>(t++)] = i;

      const double w22 = W(j, j);
      for (Eigen::Index a = 0; a < d - 1; ++a) {
        const Eigen::Index ia = others[static_cast<std::size_t>(a)];
        u(a) = K(ia, j);
        s12(a) = S(ia, j);
        for (Eigen::Index b = 0; b <= a; ++b) {
          const Eigen::Index ib = others[static_cast<std::size_t>(b)];
          const double v = W(ia, ib) - W(ia, j) * W(ib, j) / w22;
          B(a, b) = v;
          B(b, a) = v;
        }
      }

      const double a_jj = s_tilde(j);
      Bu.noalias() = B * u;
      for (int it = 0; it < opt.inner_max_sweeps; ++it) {
        double max_delta = 0.0;
        for (Eigen::Index k = 0; k < d - 1; ++k) {
          const double c = s12(k) + a_jj * (Bu(k) - B(k, k) * u(k));
          double next = 0.0;
          const double mag = std::fabs(c) - lambda;
          if (mag > 0.0) next = -std::copysign(mag, c) / (a_jj * B(k, k));
          const double delta = next - u(k);
          if (delta != 0.0) {
            u(k) = next;
            Bu += delta * B.col(k);
            max_delta = std::max(max_delta, std::fabs(delta));
          }
        }
        if (max_delta <= opt.inner_tol) break;
      }

      const double q = u.dot(Bu);
      for (Eigen::Index a = 0; a < d - 1; ++a) {
        const Eigen::Index ia = others[static_cast<std::size_t>(a)];
        K(ia, j) = u(a);
        K(j, ia) = u(a);
      }
      K(j, j) = q + 1.0 / a_jj;

      // Rank-one refresh of W = K^{-1} for the remaining columns this sweep.
      const double w22_new = a_jj;
      for (Eigen::Index a = 0; a < d - 1; ++a) {
        const Eigen::Index ia = others[static_cast<std::size_t>(a)];
        W(ia, j) = -w22_new * Bu(a);
        W(j, ia) = W(ia, j);
        for (Eigen::Index b = 0; b <= a; ++b) {
          const Eigen::Index ib = others[static_cast<std::size_t>(b)];
          const double v = B(a, b) + w22_new * Bu(a) * Bu(b);
          W(ia, ib) = v;
          W(ib, ia) = v;
        }
      }
      W(j, j) = w22_new;
    }

    est.iterations = sweep;
    est.objective_path.push_back(detail::glasso_objective(K, S, lambda, opt.penalize_diagonal));
    const double gap = S.cwiseProduct(K).sum() - static_cast<double>(d) +
                       lambda * detail::penalized_l1(K, opt.penalize_diagonal);
    est.dual_gap = gap;
    if (std::fabs(gap) <= tol) {
      est.converged = true;
      break;
    }
  }

  est.objective = est.objective_path.back();
  return est;
}

// ---------------------------------------------------------------------------
// model selection

inline double gaussian_loglik(const Eigen::MatrixXd& K, const CovarianceMatrix& cov, double n) {
  return 0.5 * n * (detail::log_det_pd(K) - cov.S.cwiseProduct(K).sum());
}

inline double ebic(double loglik, int edges, double n, int p_nodes, double gamma) {
  return -2.0 * loglik + static_cast<double>(edges) * std::log(n) +
         4.0 * gamma * static_cast<double>(edges) * std::log(static_cast<double>(p_nodes));
}

inline int count_edges(const Eigen::MatrixXd& K) {
  int e = 0;
  for (Eigen::Index i = 0; i < K.rows(); ++i)
    for (Eigen::Index j = i + 1; j < K.cols(); ++j)
      if (std::fabs(K(i, j)) > kEdgeEps) ++e;
  return e;
}

// Solves the whole path (descending lambda, warm-started) and keeps the
// EBIC minimizer; ties break toward the larger lambda, i.e. the sparser
// model.
inline GlassoResult select_model(const CovarianceMatrix& cov, const LambdaGrid& grid,
                                 double gamma = 0.5, double tol = 1e-7, int max_iter = 200,
                                 const GlassoOptions& opt = {}, bool warm_start = true) {
  require(!grid.values.empty(), errc::config_error, "lambda grid is empty");
  require(gamma >= 0.0 && gamma <= 0.5, errc::config_error, "gamma must lie in [0, 0.5]");

  std::vector<double> lambdas = grid.values;
  std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());

  GlassoResult result;
  result.covariance = cov;
  result.trace.gamma = gamma;
  result.trace.n = cov.n_effective;
  result.trace.p_nodes = static_cast<int>(cov.nodes());

  const Eigen::MatrixXd S_clean = detail::repair_correlation(cov.S);
  CovarianceMatrix clean{S_clean, cov.n_effective};

  Eigen::MatrixXd warm;
  bool have_warm = false;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_entry = 0;
  PrecisionEstimate best_est;

  for (double lambda : lambdas) {
    PrecisionEstimate est;
    try {
      est = solve(clean, lambda, tol, max_iter, opt, (warm_start && have_warm) ? &warm : nullptr);
    } catch (const Error& e) {
      result.failures.emplace_back(lambda, e.what());
      continue;
    }
    if (warm_start) {
      warm = est.K;
      have_warm = true;
    }
    EbicEntry entry;
    entry.lambda = lambda;
    entry.edges = count_edges(est.K);
    entry.loglik = gaussian_loglik(est.K, clean, cov.n_effective);
    entry.ebic = ebic(entry.loglik, entry.edges, cov.n_effective, result.trace.p_nodes, gamma);
    entry.converged = est.converged;
    entry.iterations = est.iterations;
    result.trace.entries.push_back(entry);
    if (entry.ebic < best) {
      best = entry.ebic;
      best_entry = result.trace.entries.size() - 1;
      best_est = std::move(est);
    }
  }

  if (result.trace.entries.empty())
    fail(errc::select_failure, "every lambda in the grid failed to solve");
  result.trace.entries[best_entry].selected = true;
  result.selected = std::move(best_est);
  return result;
}

}  // namespace glime
