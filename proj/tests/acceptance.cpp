// Acceptance gate: every release-blocking behavior checked end to end, one
// verdict line per criterion. Exit status is the number of failed criteria.
//
// Tolerances are pinned here on purpose; loosening them is a release decision,
// not a debugging convenience.

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <glime/glime.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "boosted_trees.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

// --- pinned tolerances and budgets -----------------------------------------
constexpr double kSolverMaxDiff = 1e-3;       // vs proximal-gradient oracle
constexpr double kGapPerNode = 1e-6;          // duality gap <= this * nodes
constexpr double kEbicSlack = 1e-5;           // recomputed-EBIC optimality slack
constexpr double kPartialCorrTol = 1e-2;      // vs residual-regression oracle
constexpr double kTopPairMinHits = 8;         // of 10 runs
constexpr double kGlimeMeanFloor6 = 0.85;     // criterion 6 mean agreement
constexpr double kGlimeMeanFloor7 = 0.80;     // criterion 7 per-observation floor
constexpr int kMinWins = 3;                   // of 4 observations
constexpr double kVizThreshold = 0.1;         // smallest drawn |weight|

constexpr double kBudget1 = 10.0, kBudget2 = 1.0, kBudget3 = 30.0, kBudget4 = 30.0,
                 kBudget5 = 5.0, kBudget9 = 60.0, kBudget10 = 10.0;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int index, const std::string& name, const Verdict& v, double seconds) {
  if (!v.pass) ++g_failures;
  std::printf("%s  %2d  %-46s  %s  (%.1fs)\n", v.pass ? "PASS" : "FAIL", index, name.c_str(),
              v.detail.c_str(), seconds);
  std::fflush(stdout);
}

template <typename F>
void run_criterion(int index, const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("threw: ") + e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(index, name, v, seconds);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return std::string(buf);
}

bool within_budget(double seconds, double budget, std::string& detail) {
  if (seconds <= budget) return true;
  detail += fmt(" [over %.0fs budget]", budget);
  return false;
}

glime::CovarianceMatrix as_cov(const Eigen::MatrixXd& S, double n_eff) {
  glime::CovarianceMatrix cov;
  cov.S = S;
  cov.n_effective = n_eff;
  return cov;
}

// ---------------------------------------------------------------------------
// 1. block-coordinate solver against the independent proximal-gradient oracle
Verdict solver_oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> fractions{0.05, 0.1, 0.25, 0.5, 0.9};
  double max_diff = 0.0, max_gap = 0.0;
  for (int seed = 1; seed <= 20; ++seed) {
    const Eigen::MatrixXd S = oracle::random_correlation(4, static_cast<std::uint64_t>(seed));
    double lambda_max = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) lambda_max = std::max(lambda_max, std::abs(S(i, j)));
    for (double f : fractions) {
      const double lambda = f * lambda_max;
      const glime::PrecisionEstimate est = glime::solve(as_cov(S, 1000.0), lambda, 1e-9, 500);
      const Eigen::MatrixXd K_ref = oracle::glasso_ista(S, lambda);
      max_diff = std::max(max_diff, (est.K - K_ref).cwiseAbs().maxCoeff());
      max_gap = std::max(max_gap, est.dual_gap);
    }
  }
  Verdict v;
  v.detail = fmt("max|dK|=%.2e gap=%.2e over 20 matrices x 5 penalties", max_diff, max_gap);
  v.pass = max_diff <= kSolverMaxDiff && max_gap <= kGapPerNode * 4;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = within_budget(sec, kBudget1, v.detail) && v.pass;
  return v;
}

// ---------------------------------------------------------------------------
// 2. penalty-path endpoints: empty graph at lambda_max, denser at lambda_min
Verdict path_endpoints() {
  const auto t0 = std::chrono::steady_clock::now();
  int checked = 0, min_edges_total = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const Eigen::MatrixXd S = oracle::random_correlation(4, static_cast<std::uint64_t>(seed));
    const glime::CovarianceMatrix cov = as_cov(S, 1000.0);
    const glime::LambdaGrid grid = glime::lambda_grid(cov, 100, 0.01);

    const glime::PrecisionEstimate at_max = glime::solve(cov, grid.values.front());
    const glime::PrecisionEstimate above_max = glime::solve(cov, 1.5 * grid.values.front());
    if (glime::count_edges(at_max.K) != 0 || glime::count_edges(above_max.K) != 0) {
      return {false, fmt("matrix %d keeps edges at or above the largest penalty", seed)};
    }

    // walk the whole grid warm-started, keeping the edge count at lambda_min
    glime::PrecisionEstimate warm = at_max;
    for (double lambda : grid.values) warm = glime::solve(cov, lambda, 1e-7, 200, {}, &warm.K);
    const int at_min = glime::count_edges(warm.K);
    if (at_min < glime::count_edges(at_max.K)) {
      return {false, fmt("matrix %d loses edges between penalty extremes", seed)};
    }
    min_edges_total += at_min;
    ++checked;
  }
  Verdict v;
  v.detail = fmt("20 matrices, full 100-point grids; %d edges at the smallest penalty",
                 min_edges_total);
  v.pass = checked == 20;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = within_budget(sec, kBudget2, v.detail) && v.pass;
  return v;
}

// ---------------------------------------------------------------------------
// 3. information-criterion selection matches an independent recomputation
Verdict ebic_argmin() {
  const auto t0 = std::chrono::steady_clock::now();
  const double gamma = 0.5, n_eff = 500.0;
  for (int problem = 1; problem <= 50; ++problem) {
    const int d = 4 + problem % 3;
    const Eigen::MatrixXd S =
        oracle::random_correlation(d, 1000 + static_cast<std::uint64_t>(problem));
    const glime::CovarianceMatrix cov = as_cov(S, n_eff);
    const glime::LambdaGrid grid = glime::lambda_grid(cov, 25, 0.05);
    const glime::GlassoResult res = glime::select_model(cov, grid, gamma, 1e-8, 500);

    // (i) the stored selection is the argmin of the stored scores, ties to the
    // larger penalty (entries are ordered largest penalty first)
    std::size_t stored_best = 0;
    for (std::size_t k = 1; k < res.trace.entries.size(); ++k)
      if (res.trace.entries[k].ebic < res.trace.entries[stored_best].ebic) stored_best = k;
    std::size_t stored_selected = res.trace.entries.size();
    for (std::size_t k = 0; k < res.trace.entries.size(); ++k)
      if (res.trace.entries[k].selected) stored_selected = k;
    if (stored_selected == res.trace.entries.size()) {
      return {false, fmt("problem %d: no entry is marked selected", problem)};
    }
    if (stored_selected != stored_best) {
      return {false, fmt("problem %d: selected entry %zu but stored argmin is %zu", problem,
                         stored_selected, stored_best)};
    }

    // (ii) recompute every score from scratch (cold solves, explicit formula)
    // and require the selected penalty to attain the recomputed minimum
    std::vector<double> recomputed;
    for (double lambda : grid.values) {
      const glime::PrecisionEstimate est = glime::solve(cov, lambda, 1e-8, 500);
      const Eigen::LLT<Eigen::MatrixXd> llt(est.K);
      if (llt.info() != Eigen::Success) return {false, fmt("problem %d: non-PD solution", problem)};
      double log_det = 0.0;
      for (int i = 0; i < d; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
      const double loglik = 0.5 * n_eff * (log_det - S.cwiseProduct(est.K).sum());
      int edges = 0;
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
          if (std::abs(est.K(i, j)) > 1e-8) ++edges;
      recomputed.push_back(-2.0 * loglik + edges * std::log(n_eff) +
                           4.0 * gamma * edges * std::log(static_cast<double>(d)));
    }
    const double best = *std::min_element(recomputed.begin(), recomputed.end());
    const double slack = kEbicSlack * (1.0 + std::abs(best));
    if (recomputed[stored_selected] > best + slack) {
      return {false, fmt("problem %d: selected score %.6f misses recomputed minimum %.6f",
                         problem, recomputed[stored_selected], best)};
    }
  }
  Verdict v;
  v.detail = "50 problems: stored argmin exact, recomputed minimum attained";
  v.pass = true;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = within_budget(sec, kBudget3, v.detail) && v.pass;
  return v;
}

// ---------------------------------------------------------------------------
// 4. unpenalized partial correlations against the residual-regression oracle
Verdict partial_correlation_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = 10000;
  double max_diff = 0.0;
  for (int p = 3; p <= 6; ++p) {
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i) {
      const std::uint64_t row = static_cast<std::uint64_t>(i) + 1;
      const double g = glime::rng::normal(77, row, 5000);
      for (int j = 0; j < p; ++j) {
        const double load = 0.9 - 0.12 * j;
        X(i, j) = load * g + glime::rng::normal(77, row, 5100 + static_cast<std::uint64_t>(j));
      }
    }
    glime::LocalDataset local;
    local.data = X;
    for (int j = 0; j < p; ++j) local.column_names.push_back("V" + std::to_string(j + 1));
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    const glime::CovarianceMatrix cov = glime::weighted_correlation(local, w);
    const glime::PrecisionEstimate est = glime::solve(cov, 0.0, 1e-10, 500);
    const glime::PartialCorrelationNetwork net =
        glime::partial_correlations(est, local.column_names);
    const Eigen::MatrixXd ref = oracle::residual_partial_correlations(X);
    max_diff = std::max(max_diff, (net.W - ref).cwiseAbs().maxCoeff());
  }
  Verdict v;
  v.detail = fmt("max|dW|=%.2e across widths 3..6 at n=10000", max_diff);
  v.pass = max_diff <= kPartialCorrTol;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = within_budget(sec, kBudget4, v.detail) && v.pass;
  return v;
}

// ---------------------------------------------------------------------------
// 5. tie-corrected rank correlation equals the pair-enumeration oracle
Verdict kendall_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  glime::rng::Stream pick(20250823, 1);
  int defined = 0, undefined = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + pick.below(30);
    const bool tie_heavy = trial % 2 == 0;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (tie_heavy) {
        a[i] = static_cast<double>(pick.below(5));
        b[i] = static_cast<double>(pick.below(5));
      } else {
        a[i] = pick.uniform01();
        b[i] = pick.uniform01();
      }
    }
    const std::optional<double> mine = glime::kendall_tau_b(a, b);
    const std::optional<double> ref = oracle::tau_b_groups(a, b);
    if (mine.has_value() != ref.has_value()) {
      return {false, fmt("trial %d: definedness disagrees", trial)};
    }
    if (!mine) {
      ++undefined;
      continue;
    }
    ++defined;
    if (*mine != *ref) {  // bitwise: both sides reduce the same pair counts
      return {false, fmt("trial %d: %.17g vs oracle %.17g", trial, *mine, *ref)};
    }
  }
  Verdict v;
  v.detail = fmt("1000 ranking pairs bitwise equal (%d defined, %d undefined)", defined, undefined);
  v.pass = defined > 0 && undefined > 0;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = within_budget(sec, kBudget5, v.detail) && v.pass;
  return v;
}

// ---------------------------------------------------------------------------
// shared study runner for criteria 6-8
struct StudyOutcome {
  glime::StudyResult result;
  double mean_advantage = 0.0;
};

StudyOutcome run_study(const glime::TabularDataset& train, const glime::TabularDataset& test,
                       glime::Predictor& predictor, std::uint64_t seed_base) {
  glime::StudyConfig sc;
  sc.run.perturbation.seed = seed_base;
  sc.runs = 10;
  sc.observations = {0, 1, 2, 3};
  StudyOutcome out;
  out.result = glime::stability_study(predictor, test, glime::compute_stats(train), sc);
  for (const glime::ComparisonSummary& c : out.result.comparisons)
    out.mean_advantage += c.advantage / static_cast<double>(out.result.comparisons.size());
  return out;
}

std::string study_digest(const glime::StudyResult& r) {
  std::string s;
  for (const glime::ComparisonSummary& c : r.comparisons)
    s += fmt("[%s: %.3f vs %.3f]", c.instance_id.c_str(), c.glime.mean_tau, c.lime.mean_tau);
  return s;
}

// 6. first held-out observation: dominant features on top, high run agreement
Verdict biopsy_reproduction(const StudyOutcome& biopsy) {
  const glime::ComparisonSummary& first = biopsy.result.comparisons.at(0);
  int top_pair_hits = 0;
  for (const glime::FeatureRanking& ranking : biopsy.result.glime_rankings.at(0)) {
    if (ranking.entries.size() < 2) continue;
    const std::set<std::string> top{ranking.entries[0].feature, ranking.entries[1].feature};
    if (top == std::set<std::string>{"V6", "V1"}) ++top_pair_hits;
  }
  Verdict v;
  v.detail = fmt("V6+V1 on top %d/10; agreement %.3f vs %.3f", top_pair_hits,
                 first.glime.mean_tau, first.lime.mean_tau);
  v.pass = top_pair_hits >= kTopPairMinHits && first.glime.mean_tau >= kGlimeMeanFloor6 &&
           first.glime.mean_tau > first.lime.mean_tau;
  return v;
}

// 7. four-observation study: network rankings steadier than the linear baseline
Verdict four_observation_study(const StudyOutcome& biopsy) {
  int wins = 0;
  double worst = 1.0;
  for (const glime::ComparisonSummary& c : biopsy.result.comparisons) {
    if (c.glime_wins) ++wins;
    worst = std::min(worst, c.glime.mean_tau);
  }
  Verdict v;
  v.detail = fmt("wins %d/4, weakest mean %.3f %s", wins, worst,
                 study_digest(biopsy.result).c_str());
  v.pass = wins >= kMinWins && worst >= kGlimeMeanFloor7;
  return v;
}

// 8. wide-table regime: the advantage must grow with feature count
Verdict wide_table_regime(const StudyOutcome& oai, const StudyOutcome& biopsy) {
  int wins = 0;
  for (const glime::ComparisonSummary& c : oai.result.comparisons)
    if (c.glime_wins) ++wins;
  Verdict v;
  v.detail = fmt("wins %d/4, advantage %.3f vs %.3f on the narrow table %s", wins,
                 oai.mean_advantage, biopsy.mean_advantage, study_digest(oai.result).c_str());
  v.pass = wins >= kMinWins && oai.mean_advantage > biopsy.mean_advantage;
  return v;
}

// ---------------------------------------------------------------------------
// 9. the command line tool is bit-reproducible
std::string slurp_or_empty(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

Verdict cli_determinism(std::vector<std::string>& dot_files_out) {
  const auto t0 = std::chrono::steady_clock::now();
  const char* cli = std::getenv("GLIME_CLI");
  if (cli == nullptr) return {false, "GLIME_CLI is not set (run through ctest)"};

  const fs::path dir =
      fs::temp_directory_path() / ("glime_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto invoke = [&](const std::string& out_dir) {
    const std::string cmd = std::string("\"") + cli +
                            "\" explain --dataset biopsy --dataset-seed 42 --observation 0"
                            " --m 1000 --seed 100 --out-dir \"" +
                            out_dir + "\" > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const fs::path a = dir / "a", b = dir / "b";
  if (!invoke(a.string()) || !invoke(b.string())) return {false, "explain invocation failed"};

  int compared = 0;
  for (const std::string& f : {std::string("explanation_0_0.json"), std::string("trace_0_0.json"),
                               std::string("adjacency_0_0.csv"), std::string("graph_0_0.dot"),
                               std::string("graph_0_0.graphml")}) {
    const std::string one = slurp_or_empty(a / f), two = slurp_or_empty(b / f);
    if (one.empty() || one != two) return {false, "artifact '" + f + "' differs between runs"};
    ++compared;
  }
  dot_files_out.push_back((a / "graph_0_0.dot").string());
  Verdict v;
  v.detail = fmt("%d artifacts byte-identical across two invocations", compared);
  v.pass = true;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = within_budget(sec, kBudget9, v.detail) && v.pass;
  return v;
}

// ---------------------------------------------------------------------------
// 10. drawings parse under an independent grammar check; weak edges are absent
Verdict export_validity(const glime::TabularDataset& train, const glime::TabularDataset& test,
                        glime::Predictor& predictor, const std::vector<std::string>& extra_dots) {
  const auto t0 = std::chrono::steady_clock::now();
  const glime::FeatureStats stats = glime::compute_stats(train);
  int graphs = 0, edges = 0;
  double weakest = 1.0;
  for (int obs = 0; obs < 4; ++obs) {
    glime::RunConfig cfg;
    cfg.perturbation.m = 2000;
    cfg.perturbation.seed = 300 + static_cast<std::uint64_t>(obs);
    const glime::ExplainResult res =
        glime::explain_instance(predictor, test.rows.row(obs).transpose(), stats,
                                test.feature_names, std::to_string(obs), cfg);
    const glime::PartialCorrelationNetwork& net = res.explanation.network;
    const oracle::DotGraph parsed = oracle::parse_dot(glime::to_dot(net, kVizThreshold));
    const std::vector<glime::Edge> kept = glime::edge_list(net, kVizThreshold);
    if (parsed.edges.size() != kept.size())
      return {false, fmt("observation %d: %zu drawn edges but %zu kept", obs,
                         parsed.edges.size(), kept.size())};
    for (const glime::Edge& e : kept) {
      weakest = std::min(weakest, std::abs(e.weight));
      if (std::abs(e.weight) < kVizThreshold)
        return {false, fmt("observation %d draws an edge of weight %.4f", obs, e.weight)};
    }
    edges += static_cast<int>(kept.size());
    ++graphs;
  }
  for (const std::string& path : extra_dots) {
    const oracle::DotGraph parsed = oracle::parse_dot(slurp_or_empty(path));
    for (const oracle::DotEdge& e : parsed.edges) {
      const auto it = e.attrs.find("weight");
      if (it != e.attrs.end()) weakest = std::min(weakest, std::stod(it->second));
    }
    ++graphs;
  }
  Verdict v;
  v.detail = fmt("%d drawings parsed, %d edges kept, weakest |w|=%.3f", graphs, edges, weakest);
  v.pass = graphs >= 4 && weakest >= kVizThreshold - 5e-4;
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.pass = within_budget(sec, kBudget10, v.detail) && v.pass;
  return v;
}

}  // namespace

int main() {
  std::printf("acceptance gate: 10 criteria\n");

  run_criterion(1, "solver matches proximal-gradient oracle", solver_oracle_equivalence);
  run_criterion(2, "penalty path endpoints behave", path_endpoints);
  run_criterion(3, "information-criterion argmin is honest", ebic_argmin);
  run_criterion(4, "partial correlations match residual oracle", partial_correlation_oracle);
  run_criterion(5, "rank correlation bitwise-matches oracle", kendall_exactness);

  // shared fixtures for the study criteria; a broken fixture fails 6, 7, 8
  // and 10 with the reason rather than aborting the whole gate
  std::optional<glime::TabularDataset> biopsy_train, biopsy_test;
  std::optional<glime::KernelClassifier> biopsy_clf;
  std::optional<StudyOutcome> biopsy;
  std::string fixture_error;
  try {
    const glime::TabularDataset full = glime::datagen::make_biopsy_like(42);
    auto [tr, te] = glime::split(full, 0.2, 1);
    biopsy_clf = glime::KernelClassifier::train(tr, {});
    std::printf("... running the narrow-table study (4 rows x 10 runs)\n");
    std::fflush(stdout);
    biopsy = run_study(tr, te, *biopsy_clf, 100);
    biopsy_train = std::move(tr);
    biopsy_test = std::move(te);
  } catch (const std::exception& e) {
    fixture_error = e.what();
  }
  auto fixture_failure = [&] { return Verdict{false, "study fixture failed: " + fixture_error}; };

  run_criterion(6, "dominant features and agreement on first row", [&] {
    return biopsy ? biopsy_reproduction(*biopsy) : fixture_failure();
  });
  run_criterion(7, "steadier than the linear baseline (4 rows)", [&] {
    return biopsy ? four_observation_study(*biopsy) : fixture_failure();
  });

  run_criterion(8, "advantage grows on the 40-feature table", [&]() -> Verdict {
    if (!biopsy) return fixture_failure();
    const glime::TabularDataset oai_full = glime::datagen::make_oai_like(7);
    const auto [oai_train, oai_test] = glime::split(oai_full, 0.2, 1);
    // The wide table is explained around a boosted-trees model: its
    // piecewise-constant response is the regime where a dense linear
    // surrogate reshuffles the 36 untouched features run to run.
    testmodel::BoostedTrees oai_clf = testmodel::BoostedTrees::train(oai_train, {});
    std::printf("... running the wide-table study (4 rows x 10 runs)\n");
    std::fflush(stdout);
    return wide_table_regime(run_study(oai_train, oai_test, oai_clf, 200), *biopsy);
  });

  std::vector<std::string> dot_files;
  run_criterion(9, "command line runs are byte-identical",
                [&] { return cli_determinism(dot_files); });
  run_criterion(10, "graph drawings parse and hide weak edges", [&]() -> Verdict {
    if (!biopsy_train) return fixture_failure();
    return export_validity(*biopsy_train, *biopsy_test, *biopsy_clf, dot_files);
  });

  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures;
}
