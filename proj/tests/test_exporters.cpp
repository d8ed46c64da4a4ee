#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <string>

#include "glime/exporters.hpp"
#include "oracles.hpp"

using namespace glime;

namespace {

PartialCorrelationNetwork sample_net() {
  PartialCorrelationNetwork net;
  net.node_names = {"V1", "V2", "V3", "O1"};
  net.W = Eigen::MatrixXd::Zero(4, 4);
  auto set = [&](Eigen::Index i, Eigen::Index j, double v) {
    net.W(i, j) = v;
    net.W(j, i) = v;
  };
  set(0, 1, 0.594);
  set(1, 3, -0.395);
  set(0, 3, 0.04);  // below the usual drawing threshold
  return net;
}

}  // namespace

TEST_CASE("drawings parse under a from-scratch grammar reader") {
  const std::string dot = to_dot(sample_net(), 0.1);
  const oracle::DotGraph g = oracle::parse_dot(dot);
  CHECK(g.nodes == std::vector<std::string>{"V1", "V2", "V3", "O1"});
  REQUIRE(g.edges.size() == 2);  // the 0.04 edge is not drawn
  CHECK(g.edges[0].a == "V1");
  CHECK(g.edges[0].b == "V2");
  CHECK(g.edges[0].attrs.at("label") == "0.594");
  CHECK(g.edges[0].attrs.at("color") == "darkgreen");
  CHECK(g.edges[1].attrs.at("color") == "red");
  // numeric attributes parse as numbers
  CHECK(std::stod(g.edges[0].attrs.at("weight")) == 0.594);
  CHECK(std::stod(g.edges[0].attrs.at("penwidth")) > 1.0);
}

TEST_CASE("a zero drawing threshold draws every nonzero edge") {
  const oracle::DotGraph g = oracle::parse_dot(to_dot(sample_net(), 0.0));
  CHECK(g.edges.size() == 3);
}

TEST_CASE("the grammar reader rejects malformed drawings") {
  CHECK_THROWS(oracle::parse_dot("digraph x { a -> b; }"));
  CHECK_THROWS(oracle::parse_dot("graph x { \"a\" -- \"b\"; }"));  // undeclared endpoints
  CHECK_THROWS(oracle::parse_dot("graph x { \"a\"; \"a\" -- ; }"));
  CHECK_THROWS(oracle::parse_dot("graph x { \"a\" }"));            // missing semicolon
  CHECK_THROWS(oracle::parse_dot("graph { }"));
}

TEST_CASE("the structured graph export keeps full precision and the threshold") {
  const std::string xml = to_graphml(sample_net(), 0.1);
  CHECK_THAT(xml, Catch::Matchers::ContainsSubstring("edgedefault=\"undirected\""));
  CHECK_THAT(xml, Catch::Matchers::ContainsSubstring("<node id=\"O1\"/>"));
  CHECK_THAT(xml, Catch::Matchers::ContainsSubstring(">0.594<"));
  CHECK_THAT(xml, Catch::Matchers::ContainsSubstring(">-0.395<"));
  CHECK_THAT(xml, Catch::Matchers::ContainsSubstring(">0.04<"));  // kept despite the threshold
  CHECK_THAT(xml, Catch::Matchers::ContainsSubstring("<data key=\"t\">0.1</data>"));
  // tags open and close in balance
  auto count = [&](const std::string& needle) {
    std::size_t n = 0, at = 0;
    while ((at = xml.find(needle, at)) != std::string::npos) {
      ++n;
      at += needle.size();
    }
    return n;
  };
  CHECK(count("<edge ") == 3);
  CHECK(count("</edge>") == 3);
  CHECK(count("<graph ") == count("</graph>"));
}

TEST_CASE("the adjacency table is a full matrix at three decimals") {
  const std::string csv = to_adjacency_csv(sample_net());
  CHECK_THAT(csv, Catch::Matchers::StartsWith("V1,V2,V3,O1\n"));
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("0.000,0.594,0.000,0.040\n"));
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("0.594,0.000,0.000,-0.395\n"));
  // 1 header + 4 rows
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("the selection trace serializes every path entry") {
  EbicTrace trace;
  trace.gamma = 0.5;
  trace.n = 1234.5;
  trace.p_nodes = 4;
  trace.entries.push_back({0.5, 100.0, 0, -50.0, true, 3, false});
  trace.entries.push_back({0.25, 90.0, 2, -40.0, true, 5, true});
  const nlohmann::ordered_json j = trace_to_json(trace);
  CHECK(j["gamma"] == 0.5);
  CHECK(j["entries"].size() == 2);
  CHECK(j["entries"][1]["selected"] == true);
  CHECK(j["entries"][0]["lambda"] == 0.5);
  CHECK(j["entries"][0]["edges"] == 0);
}

TEST_CASE("stability json carries the pair matrix with nulls for undefined") {
  StabilityReport r;
  r.method = "glime";
  r.instance_id = "9";
  r.tau = Eigen::MatrixXd::Identity(2, 2);
  r.tau(0, 1) = r.tau(1, 0) = std::numeric_limits<double>::quiet_NaN();
  r.defined_pairs = 0;
  r.undefined_pairs = 1;
  r.mean_tau = std::numeric_limits<double>::quiet_NaN();
  const std::string text = stability_to_json(r).dump();
  CHECK_THAT(text, Catch::Matchers::ContainsSubstring("\"mean_tau\":null"));
  CHECK_THAT(text, Catch::Matchers::ContainsSubstring("[1.0,null]"));
  CHECK_THAT(text, Catch::Matchers::ContainsSubstring("\"undefined_pairs\":1"));
}

TEST_CASE("study summaries tabulate per-observation rows plus a mean row") {
  auto report = [](const std::string& id, double mean) {
    StabilityReport r;
    r.method = "x";
    r.instance_id = id;
    r.tau = Eigen::MatrixXd::Identity(2, 2);
    r.mean_tau = mean;
    r.defined_pairs = 1;
    return r;
  };
  ComparisonSummary a;
  a.instance_id = "1";
  a.glime = report("1", 0.9);
  a.lime = report("1", 0.8);
  a.advantage = 0.1;
  a.glime_wins = true;
  ComparisonSummary b;
  b.instance_id = "2";
  b.glime = report("2", 0.7);
  b.lime = report("2", 0.75);
  b.advantage = -0.05;
  b.glime_wins = false;

  const std::string csv = summary_to_csv({a, b});
  CHECK_THAT(csv, Catch::Matchers::StartsWith(
                      "instance,glime_mean_tau,lime_mean_tau,advantage,winner\n"));
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("1,0.900000,0.800000,0.100000,glime\n"));
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("2,0.700000,0.750000,-0.050000,lime\n"));
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("mean,0.800000,0.775000,0.025000,glime\n"));
}
