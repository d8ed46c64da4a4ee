#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "glime/rng.hpp"
#include "glime/tabular.hpp"

namespace glime::datagen {

namespace detail {

inline std::vector<std::string> numbered_features(int p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (int j = 1; j <= p; ++j) names.push_back("V" + std::to_string(j));
  return names;
}

inline double clamp_scale(double v) { return std::clamp(std::round(v), 1.0, 10.0); }

}  // namespace detail

// A cytology-style screening table: 699 rows, nine graded features on a
// 1-10 integer scale, 460 benign (class 1) and 239 malignant (class 0)
// rows. A latent severity drives four columns with very different
// signal-to-noise ratios (V6 strongest, then V1, V7, V2); the remaining
// five columns are identically distributed pure noise, so a dense linear
// surrogate sees five near-tied tail weights whose order is decided by
// sampling luck alone.
inline TabularDataset make_biopsy_like(std::uint64_t seed = 42) {
  constexpr int kRows = 699, kBenign = 460;
  TabularDataset d;
  d.feature_names = detail::numbered_features(9);
  d.rows.resize(kRows, 9);
  Eigen::VectorXi y(kRows);

  std::vector<int> labels(kRows, 0);
  std::fill(labels.begin(), labels.begin() + kBenign, 1);
  rng::Stream order(seed, 900);
  rng::shuffle(labels, order);

  for (int i = 0; i < kRows; ++i) {
    const std::uint64_t row = static_cast<std::uint64_t>(i) + 1;
    y(i) = labels[static_cast<std::size_t>(i)];
    const double raw = std::fabs(rng::normal(seed, row, 101));
    const double s = labels[static_cast<std::size_t>(i)] == 1 ? 0.8 * raw : 2.3 + 0.9 * raw;
    auto eps = [&](int j) { return rng::normal(seed, row, static_cast<std::uint64_t>(j)); };

    d.rows(i, 0) = detail::clamp_scale(1.6 + 1.55 * s + 1.05 * eps(1));  // V1
    d.rows(i, 1) = detail::clamp_scale(1.0 + 0.65 * s + 1.00 * eps(2));
    d.rows(i, 2) = detail::clamp_scale(1.5 + 1.10 * eps(3));
    d.rows(i, 3) = detail::clamp_scale(1.5 + 1.10 * eps(4));
    d.rows(i, 4) = detail::clamp_scale(1.5 + 1.10 * eps(5));
    d.rows(i, 5) = detail::clamp_scale(1.0 + 2.20 * s + 0.85 * eps(6));  // V6
    d.rows(i, 6) = detail::clamp_scale(1.5 + 0.95 * s + 1.15 * eps(7));
    d.rows(i, 7) = detail::clamp_scale(1.5 + 1.10 * eps(8));
    d.rows(i, 8) = detail::clamp_scale(1.5 + 1.10 * eps(9));
  }
  d.target = y;
  return d;
}

// A cohort-study-style table: 3873 rows, forty continuous features. A
// latent severity feeds a small set of strong carriers (V5 strongest, then
// V34 and V36) plus two weak ones (V12, V20); V33 is informative on its
// own. The remaining columns form correlated four-wide blocks of pure
// noise, which is exactly the regime where dense linear surrogates start
// reshuffling their tails from run to run.
inline TabularDataset make_oai_like(std::uint64_t seed = 7) {
  constexpr int kRows = 3873, kCols = 40;
  TabularDataset d;
  d.feature_names = detail::numbered_features(kCols);
  d.rows.resize(kRows, kCols);
  Eigen::VectorXi y(kRows);

  for (int i = 0; i < kRows; ++i) {
    const std::uint64_t row = static_cast<std::uint64_t>(i) + 1;
    const double u = rng::normal(seed, row, 201);
    auto eps = [&](int j) { return rng::normal(seed, row, static_cast<std::uint64_t>(j)); };
    auto block = [&](int k) {
      return rng::normal(seed, row, 300 + static_cast<std::uint64_t>(k));
    };

    for (int j = 0; j < kCols; ++j) {
      double v;
      switch (j) {
        case 4:  v = 1.40 * u + 0.55 * eps(j); break;  // V5
        case 33: v = 1.25 * u + 0.65 * eps(j); break;  // V34
        case 35: v = 0.95 * u + 0.75 * eps(j); break;  // V36
        case 32: v = eps(j); break;                    // V33, own signal
        case 11: v = 0.45 * u + 0.95 * eps(j); break;  // V12
        case 19: v = 0.35 * u + 0.95 * eps(j); break;  // V20
        default: v = 0.90 * block(j / 4) + 0.80 * eps(j); break;
      }
      d.rows(i, j) = v;
    }
    const double eta = 1.7 * u + 1.0 * d.rows(i, 32) + 0.9 * rng::normal(seed, row, 202);
    y(i) = eta > 0.1 ? 1 : 0;
  }
  d.target = y;
  return d;
}

// Two well-separated Gaussian blobs in the plane; handy for fast tests.
inline TabularDataset make_two_blobs(int n = 200, std::uint64_t seed = 1) {
  TabularDataset d;
  d.feature_names = detail::numbered_features(2);
  d.rows.resize(n, 2);
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    const std::uint64_t row = static_cast<std::uint64_t>(i) + 1;
    const int label = i % 2;
    const double cx = label == 1 ? 2.0 : -2.0;
    d.rows(i, 0) = cx + rng::normal(seed, row, 1);
    d.rows(i, 1) = cx + rng::normal(seed, row, 2);
    y(i) = label;
  }
  d.target = y;
  return d;
}

inline TabularDataset make_named(const std::string& name, std::uint64_t seed) {
  if (name == "biopsy") return make_biopsy_like(seed);
  if (name == "oai") return make_oai_like(seed);
  if (name == "blobs") return make_two_blobs(200, seed);
  fail(errc::config_error, "unknown dataset '" + name + "' (expected biopsy, oai, or blobs)");
}

}  // namespace glime::datagen
