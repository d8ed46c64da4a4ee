#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "glime/errors.hpp"
#include "glime/explanation.hpp"

namespace glime {

// Kendall's tau-b over two score vectors for the same items. Pairs tied on
// both sides drop out entirely; pairs tied on one side enter only that
// side's tie term. When every pair is tied on one side the coefficient has
// no value, reported as an empty optional rather than a number.
inline std::optional<double> kendall_tau_b(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  require(a.size() == b.size(), errc::length_mismatch, "score vectors differ in length");
  require(a.size() >= 2, errc::too_few_samples, "need at least two items");
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) ++ties_a;
      else if (db == 0.0) ++ties_b;
      else if ((da > 0.0) == (db > 0.0)) ++concordant;
      else ++discordant;
    }
  }
  const double na = static_cast<double>(concordant + discordant + ties_a);
  const double nb = static_cast<double>(concordant + discordant + ties_b);
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return static_cast<double>(concordant - discordant) / std::sqrt(na * nb);
}

// Agreement between two rankings of the same feature set, ordered by
// importance magnitude. Both rankings must cover exactly the same items,
// which padded rankings always do.
inline std::optional<double> ranking_agreement(const FeatureRanking& x,
                                               const FeatureRanking& y) {
  require(x.entries.size() == y.entries.size(), errc::item_mismatch,
          "rankings cover different numbers of items");
  std::vector<std::string> names;
  names.reserve(x.entries.size());
  for (const auto& e : x.entries) names.push_back(e.feature);
  std::sort(names.begin(), names.end());

  auto magnitudes = [&](const FeatureRanking& r) {
    std::vector<std::pair<std::string, double>> m;
    m.reserve(r.entries.size());
    for (const auto& e : r.entries) m.emplace_back(e.feature, std::fabs(e.weight));
    std::sort(m.begin(), m.end());
    std::vector<double> out;
    out.reserve(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      require(m[i].first == names[i], errc::item_mismatch,
              "rankings cover different items");
      out.push_back(m[i].second);
    }
    return out;
  };
  return kendall_tau_b(magnitudes(x), magnitudes(y));
}

// Pairwise agreement across repeated runs for one observation and one
// method. Undefined pairs keep a NaN slot in the matrix and are excluded
// from the mean but counted, so a degenerate method cannot quietly look
// stable.
struct StabilityReport {
  std::string method;
  std::string instance_id;
  Eigen::MatrixXd tau;  // runs x runs, unit diagonal, NaN where undefined
  double mean_tau = std::numeric_limits<double>::quiet_NaN();
  int defined_pairs = 0;
  int undefined_pairs = 0;

  int runs() const { return static_cast<int>(tau.rows()); }
};

inline StabilityReport stability_report(const std::string& method,
                                        const std::string& instance_id,
                                        const std::vector<FeatureRanking>& run_rankings) {
  const int r = static_cast<int>(run_rankings.size());
  require(r >= 2, errc::too_few_samples, "need at least two runs");
  StabilityReport report;
  report.method = method;
  report.instance_id = instance_id;
  report.tau = Eigen::MatrixXd::Identity(r, r);
  double total = 0.0;
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      const std::optional<double> t = ranking_agreement(run_rankings[i], run_rankings[j]);
      if (t.has_value()) {
        report.tau(i, j) = *t;
        report.tau(j, i) = *t;
        total += *t;
        ++report.defined_pairs;
      } else {
        report.tau(i, j) = std::numeric_limits<double>::quiet_NaN();
        report.tau(j, i) = report.tau(i, j);
        ++report.undefined_pairs;
      }
    }
  }
  if (report.defined_pairs > 0) report.mean_tau = total / report.defined_pairs;
  return report;
}

// Head-to-head view of the two methods on one observation.
struct ComparisonSummary {
  std::string instance_id;
  StabilityReport glime;
  StabilityReport lime;
  double advantage = 0.0;  // glime mean minus lime mean
  bool glime_wins = false;
};

inline ComparisonSummary compare_methods(const StabilityReport& glime_report,
                                         const StabilityReport& lime_report) {
  require(glime_report.instance_id == lime_report.instance_id, errc::observation_mismatch,
          "reports describe different observations");
  require(glime_report.runs() == lime_report.runs(), errc::observation_mismatch,
          "reports cover different run counts");
  ComparisonSummary cmp;
  cmp.instance_id = glime_report.instance_id;
  cmp.glime = glime_report;
  cmp.lime = lime_report;
  cmp.advantage = glime_report.mean_tau - lime_report.mean_tau;
  cmp.glime_wins = glime_report.mean_tau > lime_report.mean_tau;
  return cmp;
}

}  // namespace glime
