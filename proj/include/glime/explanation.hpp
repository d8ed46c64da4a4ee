#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "glime/errors.hpp"
#include "glime/network.hpp"

namespace glime {

// Features ranked by the magnitude of their edge to the output node. In
// padded mode the zero-weight features follow in index order, which gives
// every run a full-length ranking for Kendall comparisons.
struct FeatureRanking {
  struct Entry {
    std::string feature;
    double weight = 0.0;
  };
  std::vector<Entry> entries;
  bool padded = false;
};

enum class StopReason { below_threshold, all_visited, dead_end };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::below_threshold: return "below_threshold";
    case StopReason::all_visited: return "all_visited";
    case StopReason::dead_end: return "dead_end";
  }
  return "?";
}

inline StopReason stop_reason_from_string(const std::string& s) {
  if (s == "below_threshold") return StopReason::below_threshold;
  if (s == "all_visited") return StopReason::all_visited;
  if (s == "dead_end") return StopReason::dead_end;
  fail(errc::config_error, "unknown stop reason '" + s + "'");
}

// Greedy strongest-edge walk from O1.
struct InfluencePath {
  std::vector<Eigen::Index> nodes;  // starts at the output node
  std::vector<double> edge_weights; // nodes.size() - 1 entries
  StopReason stop_reason = StopReason::dead_end;
  double stop_threshold = 0.1;
};

struct RunMetadata {
  std::string instance_id;
  std::uint64_t seed = 0;
  double lambda_selected = 0.0;
  double gamma = 0.5;
  int m = 5000;
  double kernel_width = 0.0;
  double noise_scale = 1.0;
};

struct ExplanationGraph {
  PartialCorrelationNetwork network;
  FeatureRanking ranking;
  InfluencePath path;
  RunMetadata metadata;
};

inline FeatureRanking rank_features(const PartialCorrelationNetwork& net, bool padded = false) {
  const Eigen::Index out = net.output_index();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < out; ++j)
    if (net.W(j, out) != 0.0) idx.push_back(j);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::fabs(net.W(a, out)), mb = std::fabs(net.W(b, out));
    if (ma != mb) return ma > mb;
    return a < b;
  });
  FeatureRanking ranking;
  ranking.padded = padded;
  for (Eigen::Index j : idx)
    ranking.entries.push_back({net.node_names[static_cast<std::size_t>(j)], net.W(j, out)});
  if (padded)
    for (Eigen::Index j = 0; j < out; ++j)
      if (net.W(j, out) == 0.0)
        ranking.entries.push_back({net.node_names[static_cast<std::size_t>(j)], 0.0});
  return ranking;
}

// From the output node, repeatedly hop to the unvisited neighbor with the
// strongest |weight| (ties to the lower index). Stops when every node has
// been visited, when the current node has no unvisited neighbor, or when
// the best available |weight| drops below the threshold.
inline InfluencePath extract_path(const PartialCorrelationNetwork& net,
                                  double stop_threshold = 0.1) {
  require(stop_threshold >= 0.0, errc::config_error, "stop threshold must be nonnegative");
  const Eigen::Index d = net.nodes();
  InfluencePath path;
  path.stop_threshold = stop_threshold;
  std::vector<bool> visited(static_cast<std::size_t>(d), false);
  Eigen::Index current = net.output_index();
  path.nodes.push_back(current);
  visited[static_cast<std::size_t>(current)] = true;
  Eigen::Index n_visited = 1;

  while (true) {
    if (n_visited == d) {
      path.stop_reason = StopReason::all_visited;
      return path;
    }
    Eigen::Index best = -1;
    double best_mag = -1.0;
    for (Eigen::Index u = 0; u < d; ++u) {
      if (visited[static_cast<std::size_t>(u)] || net.W(current, u) == 0.0) continue;
      const double mag = std::fabs(net.W(current, u));
      if (mag > best_mag) {
        best_mag = mag;
        best = u;
      }
    }
    if (best < 0) {
      path.stop_reason = StopReason::dead_end;
      return path;
    }
    if (best_mag < stop_threshold) {
      path.stop_reason = StopReason::below_threshold;
      return path;
    }
    path.edge_weights.push_back(net.W(current, best));
    path.nodes.push_back(best);
    visited[static_cast<std::size_t>(best)] = true;
    ++n_visited;
    current = best;
  }
}

inline bool operator==(const FeatureRanking::Entry& a, const FeatureRanking::Entry& b) {
  return a.feature == b.feature && a.weight == b.weight;
}

inline ExplanationGraph build_explanation(const PartialCorrelationNetwork& net,
                                          const FeatureRanking& ranking,
                                          const InfluencePath& path, const RunMetadata& metadata) {
  const FeatureRanking derived_ranking = rank_features(net, ranking.padded);
  if (derived_ranking.entries != ranking.entries)
    fail(errc::inconsistent_components, "ranking does not derive from the network");
  const InfluencePath derived_path = extract_path(net, path.stop_threshold);
  if (derived_path.nodes != path.nodes || derived_path.edge_weights != path.edge_weights ||
      derived_path.stop_reason != path.stop_reason)
    fail(errc::inconsistent_components, "path does not derive from the network");
  return ExplanationGraph{net, ranking, path, metadata};
}

// ---------------------------------------------------------------------------
// JSON (stable key order; all doubles round-trip exactly)

inline nlohmann::ordered_json to_json(const ExplanationGraph& g) {
  nlohmann::ordered_json j;
  j["nodes"] = g.network.node_names;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const Edge& e : edge_list(g.network, 0.0))
    edges.push_back({{"i", e.i}, {"j", e.j}, {"w", e.weight}});
  j["edges"] = std::move(edges);
  nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
  for (const auto& entry : g.ranking.entries)
    ranking.push_back({{"feature", entry.feature}, {"w", entry.weight}});
  j["ranking"] = std::move(ranking);
  nlohmann::ordered_json path;
  nlohmann::ordered_json path_nodes = nlohmann::ordered_json::array();
  for (Eigen::Index idx : g.path.nodes)
    path_nodes.push_back(g.network.node_names[static_cast<std::size_t>(idx)]);
  path["nodes"] = std::move(path_nodes);
  path["weights"] = g.path.edge_weights;
  path["stop_reason"] = to_string(g.path.stop_reason);
  path["stop_threshold"] = g.path.stop_threshold;
  j["path"] = std::move(path);
  j["metadata"] = {{"instance", g.metadata.instance_id},
                   {"seed", g.metadata.seed},
                   {"lambda", g.metadata.lambda_selected},
                   {"gamma", g.metadata.gamma},
                   {"m", g.metadata.m},
                   {"kernel_width", g.metadata.kernel_width},
                   {"noise_scale", g.metadata.noise_scale},
                   {"ranking_padded", g.ranking.padded}};
  return j;
}

inline ExplanationGraph explanation_from_json(const nlohmann::json& j) {
  PartialCorrelationNetwork net;
  net.node_names = j.at("nodes").get<std::vector<std::string>>();
  const Eigen::Index d = static_cast<Eigen::Index>(net.node_names.size());
  net.W = Eigen::MatrixXd::Zero(d, d);
  for (const auto& e : j.at("edges")) {
    const Eigen::Index i = e.at("i").get<Eigen::Index>();
    const Eigen::Index k = e.at("j").get<Eigen::Index>();
    require(i >= 0 && k >= 0 && i < d && k < d, errc::config_error, "edge index out of range");
    const double w = e.at("w").get<double>();
    net.W(i, k) = w;
    net.W(k, i) = w;
  }

  FeatureRanking ranking;
  ranking.padded = j.at("metadata").value("ranking_padded", false);
  for (const auto& e : j.at("ranking"))
    ranking.entries.push_back({e.at("feature").get<std::string>(), e.at("w").get<double>()});

  InfluencePath path;
  path.stop_threshold = j.at("path").at("stop_threshold").get<double>();
  path.stop_reason = stop_reason_from_string(j.at("path").at("stop_reason").get<std::string>());
  path.edge_weights = j.at("path").at("weights").get<std::vector<double>>();
  for (const auto& name : j.at("path").at("nodes")) {
    const auto it = std::find(net.node_names.begin(), net.node_names.end(),
                              name.get<std::string>());
    require(it != net.node_names.end(), errc::config_error, "path node not in node list");
    path.nodes.push_back(std::distance(net.node_names.begin(), it));
  }

  RunMetadata meta;
  const auto& m = j.at("metadata");
  meta.instance_id = m.at("instance").get<std::string>();
  meta.seed = m.at("seed").get<std::uint64_t>();
  meta.lambda_selected = m.at("lambda").get<double>();
  meta.gamma = m.at("gamma").get<double>();
  meta.m = m.at("m").get<int>();
  meta.kernel_width = m.at("kernel_width").get<double>();
  meta.noise_scale = m.value("noise_scale", 1.0);

  return build_explanation(net, ranking, path, meta);
}

}  // namespace glime
