// Command-line front end: explain one observation, run the stability
// harness, re-render saved explanations, or emit a synthetic benchmark
// table. All artifacts are deterministic functions of the flags.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glime/glime.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string data_path;
  std::string dataset_name;
  std::uint64_t dataset_seed = 42;
  std::string target = "class";
  double test_fraction = 0.2;
  std::uint64_t split_seed = 17;

  std::uint64_t seed = 0;
  int m = 5000;
  double kernel_width = 0.0;  // 0 keeps the automatic width
  double noise_scale = 1.0;
  double gamma = 0.5;
  int lambda_count = 100;
  double lambda_ratio = 0.01;
  double stop_threshold = 0.1;
  double ridge = 1e-3;
  bool unweighted = false;

  std::string predictor = "builtin";
  std::string predictor_cmd;
  double gamma_rbf = 0.0;
  double l2 = 1e-3;
  int max_iter = 2000;
  double tol = 1e-6;

  std::string out_dir = ".";
  int observation = -1;
  std::vector<int> observations;
  int runs = 10;
  int run_label = 0;
  double viz_threshold = 0.1;

  std::string explanation_path, dot_path, graphml_path, adjacency_path, csv_out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  glime::require(static_cast<bool>(in), glime::errc::io_error, "cannot open '" + path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

// Values from a flat JSON object become the option defaults; anything
// passed on the command line afterwards wins.
void apply_config(const std::string& path, Options& o) {
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    glime::fail(glime::errc::config_error, "bad config '" + path + "': " + e.what());
  }
  glime::require(cfg.is_object(), glime::errc::config_error,
                 "config must be a flat JSON object");
  for (const auto& [key, value] : cfg.items()) {
    try {
      if (key == "data") o.data_path = value.get<std::string>();
      else if (key == "dataset") o.dataset_name = value.get<std::string>();
      else if (key == "dataset-seed") o.dataset_seed = value.get<std::uint64_t>();
      else if (key == "target") o.target = value.get<std::string>();
      else if (key == "test-fraction") o.test_fraction = value.get<double>();
      else if (key == "split-seed") o.split_seed = value.get<std::uint64_t>();
      else if (key == "seed") o.seed = value.get<std::uint64_t>();
      else if (key == "m") o.m = value.get<int>();
      else if (key == "kernel-width") o.kernel_width = value.get<double>();
      else if (key == "noise-scale") o.noise_scale = value.get<double>();
      else if (key == "gamma") o.gamma = value.get<double>();
      else if (key == "lambda-count") o.lambda_count = value.get<int>();
      else if (key == "lambda-ratio") o.lambda_ratio = value.get<double>();
      else if (key == "stop-threshold") o.stop_threshold = value.get<double>();
      else if (key == "ridge") o.ridge = value.get<double>();
      else if (key == "unweighted") o.unweighted = value.get<bool>();
      else if (key == "predictor") o.predictor = value.get<std::string>();
      else if (key == "predictor-cmd") o.predictor_cmd = value.get<std::string>();
      else if (key == "gamma-rbf") o.gamma_rbf = value.get<double>();
      else if (key == "l2") o.l2 = value.get<double>();
      else if (key == "max-iter") o.max_iter = value.get<int>();
      else if (key == "tol") o.tol = value.get<double>();
      else if (key == "out-dir") o.out_dir = value.get<std::string>();
      else if (key == "observation") o.observation = value.get<int>();
      else if (key == "observations") o.observations = value.get<std::vector<int>>();
      else if (key == "runs") o.runs = value.get<int>();
      else if (key == "run") o.run_label = value.get<int>();
      else if (key == "viz-threshold") o.viz_threshold = value.get<double>();
      else glime::fail(glime::errc::config_error, "unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      glime::fail(glime::errc::config_error, "config key '" + key + "': " + e.what());
    }
  }
}

void add_data_options(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "flat JSON object of option defaults");
  sub->add_option("--data", o.data_path, "CSV with feature columns and a binary target");
  sub->add_option("--dataset", o.dataset_name, "built-in synthetic table")
      ->check(CLI::IsMember({"biopsy", "oai", "blobs"}));
  sub->add_option("--dataset-seed", o.dataset_seed, "seed for the synthetic table");
  sub->add_option("--target", o.target, "name of the binary target column");
  sub->add_option("--test-fraction", o.test_fraction, "held-out share of rows");
  sub->add_option("--split-seed", o.split_seed, "seed for the stratified split");
}

void add_run_options(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "perturbation seed");
  sub->add_option("--m", o.m, "perturbed samples per neighborhood");
  sub->add_option("--kernel-width", o.kernel_width, "proximity kernel width (0 = automatic)");
  sub->add_option("--noise-scale", o.noise_scale, "perturbation spread in training-sd units");
  sub->add_option("--gamma", o.gamma, "sparsity pressure of the selection criterion");
  sub->add_option("--lambda-count", o.lambda_count, "penalty grid size");
  sub->add_option("--lambda-ratio", o.lambda_ratio, "smallest/largest penalty ratio");
  sub->add_option("--stop-threshold", o.stop_threshold, "influence-path stopping weight");
  sub->add_option("--ridge", o.ridge, "linear-surrogate penalty");
  sub->add_flag("--unweighted", o.unweighted,
                "estimate the network from plain instead of proximity-weighted correlation");
  sub->add_option("--predictor", o.predictor, "builtin | external")
      ->check(CLI::IsMember({"builtin", "external"}));
  sub->add_option("--predictor-cmd", o.predictor_cmd,
                  "external predictor command line (whitespace-separated)");
  sub->add_option("--gamma-rbf", o.gamma_rbf, "built-in classifier kernel width (0 = 0.1/p)");
  sub->add_option("--l2", o.l2, "built-in classifier penalty");
  sub->add_option("--max-iter", o.max_iter, "built-in classifier iteration cap");
  sub->add_option("--tol", o.tol, "built-in classifier gradient tolerance");
  sub->add_option("--out-dir", o.out_dir, "directory for artifacts");
}

struct Prepared {
  glime::TabularDataset train, test;
  glime::FeatureStats stats;
  std::unique_ptr<glime::Predictor> predictor;
};

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

Prepared prepare(const Options& o) {
  glime::require(o.data_path.empty() != o.dataset_name.empty(), glime::errc::config_error,
                 "give exactly one of --data or --dataset");
  glime::TabularDataset full = o.dataset_name.empty()
                                   ? glime::load_csv(o.data_path, o.target)
                                   : glime::datagen::make_named(o.dataset_name, o.dataset_seed);
  auto [train, test] = glime::split(full, o.test_fraction, o.split_seed);
  Prepared p;
  p.stats = glime::compute_stats(train);
  p.train = std::move(train);
  p.test = std::move(test);
  if (o.predictor == "builtin") {
    glime::KernelClassifierConfig cfg;
    cfg.gamma_rbf = o.gamma_rbf;
    cfg.l2_penalty = o.l2;
    cfg.max_iterations = o.max_iter;
    cfg.tolerance = o.tol;
    p.predictor = std::make_unique<glime::KernelClassifier>(
        glime::KernelClassifier::train(p.train, cfg));
  } else {
    glime::require(!o.predictor_cmd.empty(), glime::errc::config_error,
                   "--predictor external needs --predictor-cmd");
    p.predictor = std::make_unique<glime::ExternalPredictor>(split_words(o.predictor_cmd));
  }
  return p;
}

glime::RunConfig run_config(const Options& o) {
  glime::RunConfig c;
  c.perturbation.m = o.m;
  if (o.kernel_width > 0.0) c.perturbation.kernel_width = o.kernel_width;
  c.perturbation.noise_scale = o.noise_scale;
  c.perturbation.seed = o.seed;
  c.gamma = o.gamma;
  c.lambda_count = o.lambda_count;
  c.lambda_ratio = o.lambda_ratio;
  c.stop_threshold = o.stop_threshold;
  c.ridge = o.ridge;
  c.unweighted = o.unweighted;
  return c;
}

int run_explain(const Options& o) {
  glime::require(o.observation >= 0, glime::errc::config_error,
                 "--observation is required (a held-out row index)");
  Prepared p = prepare(o);
  glime::require(o.observation < p.test.n(), glime::errc::config_error,
                 "observation " + std::to_string(o.observation) + " is out of range (test rows: " +
                     std::to_string(p.test.n()) + ")");
  const glime::ExplainResult res = glime::explain_instance(
      *p.predictor, p.test.rows.row(o.observation).transpose(), p.stats, p.test.feature_names,
      std::to_string(o.observation), run_config(o));

  fs::create_directories(o.out_dir);
  const std::string tag = std::to_string(o.observation) + "_" + std::to_string(o.run_label);
  const std::string base = o.out_dir + "/";
  glime::write_text_file(base + "explanation_" + tag + ".json",
                         glime::to_json(res.explanation).dump(2) + "\n");
  glime::write_text_file(base + "adjacency_" + tag + ".csv",
                         glime::to_adjacency_csv(res.explanation.network));
  glime::write_text_file(base + "graph_" + tag + ".dot",
                         glime::to_dot(res.explanation.network, o.viz_threshold));
  glime::write_text_file(base + "graph_" + tag + ".graphml",
                         glime::to_graphml(res.explanation.network, o.viz_threshold));
  glime::write_text_file(base + "trace_" + tag + ".json",
                         glime::trace_to_json(res.trace).dump(2) + "\n");

  std::printf("observation %d: lambda=%s edges=%d\n", o.observation,
              glime::detail::format_double(res.explanation.metadata.lambda_selected).c_str(),
              glime::count_edges(res.explanation.network.W));
  const auto& entries = res.explanation.ranking.entries;
  for (std::size_t i = 0; i < entries.size() && i < 3; ++i)
    std::printf("  %zu. %s  %s\n", i + 1, entries[i].feature.c_str(),
                glime::detail::fixed(entries[i].weight, 3).c_str());
  std::printf("artifacts in %s (tag %s)\n", o.out_dir.c_str(), tag.c_str());
  return 0;
}

int run_stability(const Options& o) {
  glime::require(!o.observations.empty(), glime::errc::config_error,
                 "--observations is required (held-out row indices)");
  Prepared p = prepare(o);
  for (int obs : o.observations)
    glime::require(obs >= 0 && obs < p.test.n(), glime::errc::config_error,
                   "observation " + std::to_string(obs) + " is out of range (test rows: " +
                       std::to_string(p.test.n()) + ")");
  glime::StudyConfig sc;
  sc.run = run_config(o);
  sc.runs = o.runs;
  sc.observations = o.observations;
  const glime::StudyResult study = glime::stability_study(*p.predictor, p.test, p.stats, sc);

  fs::create_directories(o.out_dir);
  for (const glime::ComparisonSummary& c : study.comparisons) {
    glime::write_text_file(o.out_dir + "/stability_" + c.instance_id + "_glime.json",
                           glime::stability_to_json(c.glime).dump(2) + "\n");
    glime::write_text_file(o.out_dir + "/stability_" + c.instance_id + "_lime.json",
                           glime::stability_to_json(c.lime).dump(2) + "\n");
    std::printf("observation %s: glime=%s lime=%s %s\n", c.instance_id.c_str(),
                glime::detail::fixed(c.glime.mean_tau, 3).c_str(),
                glime::detail::fixed(c.lime.mean_tau, 3).c_str(),
                c.glime_wins ? "(glime ahead)" : "");
  }
  glime::write_text_file(o.out_dir + "/summary.csv", glime::summary_to_csv(study.comparisons));
  std::printf("means: glime=%s lime=%s wins=%d/%zu\n",
              glime::detail::fixed(study.mean_glime, 3).c_str(),
              glime::detail::fixed(study.mean_lime, 3).c_str(), study.glime_wins,
              study.comparisons.size());
  return 0;
}

int run_export(const Options& o) {
  glime::require(!o.explanation_path.empty(), glime::errc::config_error,
                 "--explanation is required");
  glime::require(!o.dot_path.empty() || !o.graphml_path.empty() || !o.adjacency_path.empty(),
                 glime::errc::config_error, "nothing to export; give --dot, --graphml, or --adjacency");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(o.explanation_path));
  } catch (const nlohmann::json::exception& e) {
    glime::fail(glime::errc::io_error,
                "bad explanation '" + o.explanation_path + "': " + e.what());
  }
  const glime::ExplanationGraph g = glime::explanation_from_json(j);
  if (!o.dot_path.empty())
    glime::write_text_file(o.dot_path, glime::to_dot(g.network, o.viz_threshold));
  if (!o.graphml_path.empty())
    glime::write_text_file(o.graphml_path, glime::to_graphml(g.network, o.viz_threshold));
  if (!o.adjacency_path.empty())
    glime::write_text_file(o.adjacency_path, glime::to_adjacency_csv(g.network));
  return 0;
}

int run_datagen(const Options& o) {
  glime::require(!o.dataset_name.empty(), glime::errc::config_error, "--dataset is required");
  glime::require(!o.csv_out.empty(), glime::errc::config_error, "--out is required");
  glime::write_csv(glime::datagen::make_named(o.dataset_name, o.dataset_seed), o.csv_out,
                   o.target);
  std::printf("wrote %s\n", o.csv_out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  // Config values must land before CLI11 assigns flag values, so the flag
  // scan happens ahead of the real parse.
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--config") == 0) o.config_path = argv[i + 1];

  CLI::App app{"Local explanations through sparse conditional-dependence networks"};
  app.require_subcommand(1);

  CLI::App* ex = app.add_subcommand("explain", "Explain one held-out observation");
  add_data_options(ex, o);
  add_run_options(ex, o);
  ex->add_option("--observation", o.observation, "held-out row index to explain");
  ex->add_option("--run", o.run_label, "label used in artifact file names");
  ex->add_option("--viz-threshold", o.viz_threshold, "smallest |weight| drawn in graph files");

  CLI::App* st = app.add_subcommand("stability", "Repeat both methods and score rank agreement");
  add_data_options(st, o);
  add_run_options(st, o);
  st->add_option("--observations", o.observations, "held-out row indices")->delimiter(',');
  st->add_option("--runs", o.runs, "repetitions per observation");

  CLI::App* xp = app.add_subcommand("export", "Re-render a saved explanation");
  xp->add_option("--config", o.config_path, "flat JSON object of option defaults");
  xp->add_option("--explanation", o.explanation_path, "explanation JSON to read");
  xp->add_option("--dot", o.dot_path, "write a DOT drawing here");
  xp->add_option("--graphml", o.graphml_path, "write GraphML here");
  xp->add_option("--adjacency", o.adjacency_path, "write the weight matrix CSV here");
  xp->add_option("--viz-threshold", o.viz_threshold, "smallest |weight| drawn");

  CLI::App* dg = app.add_subcommand("datagen", "Write a synthetic benchmark table");
  dg->add_option("--config", o.config_path, "flat JSON object of option defaults");
  dg->add_option("--dataset", o.dataset_name, "biopsy | oai | blobs")
      ->check(CLI::IsMember({"biopsy", "oai", "blobs"}));
  dg->add_option("--seed", o.dataset_seed, "generator seed");
  dg->add_option("--target", o.target, "target column name to write");
  dg->add_option("--out", o.csv_out, "CSV destination");

  try {
    if (!o.config_path.empty()) apply_config(o.config_path, o);
    app.parse(argc, argv);
    if (app.got_subcommand(ex)) return run_explain(o);
    if (app.got_subcommand(st)) return run_stability(o);
    if (app.got_subcommand(xp)) return run_export(o);
    if (app.got_subcommand(dg)) return run_datagen(o);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "error: %s category=config\n", e.what());
    return 2;
  } catch (const glime::Error& e) {
    std::fprintf(stderr, "error: %s category=%s\n", e.what(), e.category());
    return std::strcmp(e.category(), "config") == 0 ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s category=internal\n", e.what());
    return 1;
  }
}
