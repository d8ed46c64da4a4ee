#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "glime/errors.hpp"
#include "glime/explanation.hpp"
#include "glime/glasso.hpp"
#include "glime/lime.hpp"
#include "glime/network.hpp"
#include "glime/perturbation.hpp"
#include "glime/predictor.hpp"
#include "glime/stability.hpp"
#include "glime/tabular.hpp"

namespace glime {

struct RunConfig {
  PerturbationConfig perturbation;
  double gamma = 0.5;          // information-criterion sparsity pressure
  int lambda_count = 100;
  double lambda_ratio = 0.01;  // smallest penalty as a fraction of the largest
  double stop_threshold = 0.1; // influence-path stopping weight
  double ridge = 1e-3;         // linear-surrogate penalty
  double solver_tol = 1e-7;
  int solver_max_iter = 200;
  bool unweighted = false;     // plain correlation for the network step; the
                               // linear surrogate keeps its proximity weights
};

// Everything one explanation run produces, for both methods. The linear
// surrogate is fit on the very same perturbation set the network used, so
// a stability comparison only ever varies the thing under study: how each
// method turns one neighborhood into a ranking.
struct ExplainResult {
  ExplanationGraph explanation;
  EbicTrace trace;
  SurrogateFit surrogate;
  FeatureRanking surrogate_ranking;
  PerturbationSet perturbations;
};

inline ExplainResult explain_instance(Predictor& predictor, const Eigen::VectorXd& instance,
                                      const FeatureStats& stats,
                                      const std::vector<std::string>& feature_names,
                                      const std::string& instance_id, const RunConfig& cfg) {
  require(static_cast<Eigen::Index>(feature_names.size()) == instance.size(),
          errc::width_mismatch, "feature names do not match the instance width");

  PerturbationSet set;
  set.base_instance = instance;
  set.samples = perturbation::generate(instance, stats, cfg.perturbation);
  const double width = cfg.perturbation.resolved_width(instance.size());
  set.weights = perturbation::kernel_weights(instance, set.samples, stats, width);
  set.scores = predictor.score_batch(set.samples);

  const LocalDataset local = perturbation::assemble_local(set.samples, set.scores, feature_names);
  const CovarianceMatrix cov =
      cfg.unweighted ? weighted_correlation(local, Eigen::VectorXd::Ones(local.m()))
                     : weighted_correlation(local, set.weights);
  const LambdaGrid grid = lambda_grid(cov, cfg.lambda_count, cfg.lambda_ratio);
  GlassoOptions options;
  const GlassoResult model =
      select_model(cov, grid, cfg.gamma, cfg.solver_tol, cfg.solver_max_iter, options);

  const PartialCorrelationNetwork net = partial_correlations(model.selected, local.column_names);
  const FeatureRanking ranking = rank_features(net, /*padded=*/true);
  const InfluencePath path = extract_path(net, cfg.stop_threshold);

  RunMetadata meta;
  meta.instance_id = instance_id;
  meta.seed = cfg.perturbation.seed;
  meta.lambda_selected = model.selected.lambda;
  meta.gamma = cfg.gamma;
  meta.m = cfg.perturbation.m;
  meta.kernel_width = width;
  meta.noise_scale = cfg.perturbation.noise_scale;

  ExplainResult result;
  result.explanation = build_explanation(net, ranking, path, meta);
  result.trace = model.trace;
  result.surrogate = fit_surrogate(set.samples, set.scores, set.weights, stats,
                                   SurrogateConfig{cfg.ridge});
  result.surrogate_ranking = rank_surrogate(result.surrogate, feature_names, /*padded=*/true);
  result.perturbations = std::move(set);
  return result;
}

struct StudyConfig {
  RunConfig run;                  // run r then perturbs with seed + r
  int runs = 10;
  std::vector<int> observations;  // row indices into the held-out table
};

struct StudyResult {
  std::vector<ComparisonSummary> comparisons;
  std::vector<std::vector<FeatureRanking>> glime_rankings;  // per observation, per run
  std::vector<std::vector<FeatureRanking>> lime_rankings;
  double mean_glime = 0.0;
  double mean_lime = 0.0;
  int glime_wins = 0;
};

// Repeats both methods over fresh perturbation neighborhoods of the same
// observations and scores run-to-run rank agreement for each method.
inline StudyResult stability_study(Predictor& predictor, const TabularDataset& heldout,
                                   const FeatureStats& train_stats, const StudyConfig& cfg) {
  require(cfg.runs >= 2, errc::config_error, "need at least two runs");
  require(!cfg.observations.empty(), errc::config_error, "no observations selected");

  StudyResult out;
  for (int obs : cfg.observations) {
    require(obs >= 0 && obs < heldout.n(), errc::observation_mismatch,
            "observation index " + std::to_string(obs) + " is out of range");
    const std::string id = std::to_string(obs);
    std::vector<FeatureRanking> glime_runs, lime_runs;
    for (int r = 0; r < cfg.runs; ++r) {
      RunConfig run_cfg = cfg.run;
      run_cfg.perturbation.seed = cfg.run.perturbation.seed + static_cast<std::uint64_t>(r);
      const ExplainResult res =
          explain_instance(predictor, heldout.rows.row(obs).transpose(), train_stats,
                           heldout.feature_names, id, run_cfg);
      glime_runs.push_back(res.explanation.ranking);
      lime_runs.push_back(res.surrogate_ranking);
    }
    out.glime_rankings.push_back(glime_runs);
    out.lime_rankings.push_back(lime_runs);
    out.comparisons.push_back(compare_methods(stability_report("glime", id, glime_runs),
                                              stability_report("lime", id, lime_runs)));
  }
  for (const ComparisonSummary& c : out.comparisons) {
    out.mean_glime += c.glime.mean_tau;
    out.mean_lime += c.lime.mean_tau;
    if (c.glime_wins) ++out.glime_wins;
  }
  out.mean_glime /= static_cast<double>(out.comparisons.size());
  out.mean_lime /= static_cast<double>(out.comparisons.size());
  return out;
}

}  // namespace glime
