#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glime/errors.hpp"
#include "glime/glasso.hpp"
#include "glime/network.hpp"
#include "glime/stability.hpp"

namespace glime {

namespace detail {

inline std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  std::string s(buf);
  if (s == "-0." + std::string(static_cast<std::size_t>(places), '0')) s.erase(0, 1);
  return s;
}

}  // namespace detail

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), errc::io_error, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  require(static_cast<bool>(out), errc::io_error, "failed writing '" + path + "'");
}

// Undirected DOT drawing. Edges below the drawing threshold are left out;
// stroke width scales with |weight| and color encodes the sign.
inline std::string to_dot(const PartialCorrelationNetwork& net, double viz_threshold = 0.1) {
  require(viz_threshold >= 0.0, errc::config_error, "drawing threshold must be nonnegative");
  std::string out = "graph conditional_dependence {\n";
  out += "  layout=neato;\n  node [shape=ellipse, style=filled, fillcolor=white];\n";
  for (const std::string& name : net.node_names) out += "  \"" + name + "\";\n";
  for (const Edge& e : edge_list(net, viz_threshold)) {
    const double mag = std::fabs(e.weight);
    out += "  \"" + net.node_names[static_cast<std::size_t>(e.i)] + "\" -- \"" +
           net.node_names[static_cast<std::size_t>(e.j)] + "\" [label=\"" +
           detail::fixed(e.weight, 3) + "\", weight=\"" + detail::fixed(mag, 3) +
           "\", penwidth=" + detail::fixed(1.0 + 6.0 * mag, 2) + ", color=\"" +
           (e.weight >= 0.0 ? "darkgreen" : "red") + "\"];\n";
  }
  out += "}\n";
  return out;
}

// GraphML keeps every nonzero edge at full precision and records the
// drawing threshold as graph-level data, so nothing is lost to rounding.
inline std::string to_graphml(const PartialCorrelationNetwork& net, double viz_threshold = 0.1) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      "  <key id=\"w\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      "  <key id=\"t\" for=\"graph\" attr.name=\"viz_threshold\" attr.type=\"double\"/>\n"
      "  <graph id=\"conditional_dependence\" edgedefault=\"undirected\">\n";
  out += "    <data key=\"t\">" + detail::format_double(viz_threshold) + "</data>\n";
  for (const std::string& name : net.node_names) out += "    <node id=\"" + name + "\"/>\n";
  for (const Edge& e : edge_list(net, 0.0))
    out += "    <edge source=\"" + net.node_names[static_cast<std::size_t>(e.i)] +
           "\" target=\"" + net.node_names[static_cast<std::size_t>(e.j)] +
           "\"><data key=\"w\">" + detail::format_double(e.weight) + "</data></edge>\n";
  out += "  </graph>\n</graphml>\n";
  return out;
}

// Full symmetric weight matrix, three decimal places, one header row of
// node names.
inline std::string to_adjacency_csv(const PartialCorrelationNetwork& net) {
  std::string out;
  for (std::size_t j = 0; j < net.node_names.size(); ++j) {
    if (j) out += ',';
    out += net.node_names[j];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < net.nodes(); ++i) {
    for (Eigen::Index j = 0; j < net.nodes(); ++j) {
      if (j) out += ',';
      out += detail::fixed(net.W(i, j), 3);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json trace_to_json(const EbicTrace& trace) {
  nlohmann::ordered_json j;
  j["gamma"] = trace.gamma;
  j["n"] = trace.n;
  j["nodes"] = trace.p_nodes;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const EbicEntry& e : trace.entries) {
    entries.push_back({{"lambda", e.lambda},
                       {"ebic", e.ebic},
                       {"edges", e.edges},
                       {"loglik", e.loglik},
                       {"converged", e.converged},
                       {"iterations", e.iterations},
                       {"selected", e.selected}});
  }
  j["entries"] = std::move(entries);
  return j;
}

inline nlohmann::ordered_json stability_to_json(const StabilityReport& report) {
  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["instance"] = report.instance_id;
  j["runs"] = report.runs();
  j["mean_tau"] = report.mean_tau;  // NaN serializes as null
  j["defined_pairs"] = report.defined_pairs;
  j["undefined_pairs"] = report.undefined_pairs;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < report.tau.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < report.tau.cols(); ++k) row.push_back(report.tau(i, k));
    rows.push_back(std::move(row));
  }
  j["tau"] = std::move(rows);
  return j;
}

// One row per observation plus a trailing mean row.
inline std::string summary_to_csv(const std::vector<ComparisonSummary>& comparisons) {
  require(!comparisons.empty(), errc::empty_dataset, "no comparisons to summarize");
  std::string out = "instance,glime_mean_tau,lime_mean_tau,advantage,winner\n";
  double gsum = 0.0, lsum = 0.0;
  for (const ComparisonSummary& c : comparisons) {
    out += c.instance_id + ',' + detail::fixed(c.glime.mean_tau, 6) + ',' +
           detail::fixed(c.lime.mean_tau, 6) + ',' + detail::fixed(c.advantage, 6) + ',' +
           (c.glime_wins ? "glime" : (c.advantage < 0.0 ? "lime" : "tie")) + '\n';
    gsum += c.glime.mean_tau;
    lsum += c.lime.mean_tau;
  }
  const double n = static_cast<double>(comparisons.size());
  const double gmean = gsum / n, lmean = lsum / n;
  out += "mean," + detail::fixed(gmean, 6) + ',' + detail::fixed(lmean, 6) + ',' +
         detail::fixed(gmean - lmean, 6) + ',' +
         (gmean > lmean ? "glime" : (gmean < lmean ? "lime" : "tie")) + '\n';
  return out;
}

}  // namespace glime
