#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "glime/errors.hpp"
#include "glime/rng.hpp"

namespace glime {

// Column-named numeric matrix with an optional binary target.
// Immutable by convention once built; all operations below return copies.
struct TabularDataset {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd rows;                  // n x p
  std::optional<Eigen::VectorXi> target; // labels in {0,1}, length n

  Eigen::Index n() const { return rows.rows(); }
  Eigen::Index p() const { return rows.cols(); }
};

struct FeatureStats {
  Eigen::VectorXd means;
  Eigen::VectorXd stdevs;             // population (1/n) convention
  std::vector<bool> constant;         // true when the column never varies

  Eigen::Index p() const { return means.size(); }
};

namespace detail {

// RFC-4180 field splitter: quoted fields, "" escapes, CRLF tolerant.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // trailing CR from CRLF
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline bool parse_double(const std::string& field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
  if (first == last) return false;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline TabularDataset load_csv(const std::string& path,
                               const std::optional<std::string>& target_column = {}) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) fail(errc::empty_dataset, "'" + path + "' has no header row");
  std::vector<std::string> header = detail::split_csv_line(line);

  {
    std::set<std::string> seen(header.begin(), header.end());
    if (seen.size() != header.size())
      fail(errc::duplicate_column, "duplicate column names in header of '" + path + "'");
  }

  std::ptrdiff_t target_idx = -1;
  if (target_column) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == *target_column) target_idx = static_cast<std::ptrdiff_t>(j);
    if (target_idx < 0)
      fail(errc::unknown_column, "target column '" + *target_column + "' not in header");
  }

  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row_no;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      fail(errc::missing_value, "row " + std::to_string(row_no) + " has " +
                                    std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(header.size()));
    std::vector<double> row;
    row.reserve(header.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v;
      if (!detail::parse_double(fields[j], v))
        fail(errc::missing_value, "row " + std::to_string(row_no) + ", column '" + header[j] +
                                      "': empty or non-numeric cell");
      if (static_cast<std::ptrdiff_t>(j) == target_idx) {
        if (v != 0.0 && v != 1.0)
          fail(errc::target_not_binary, "row " + std::to_string(row_no) + ": target value " +
                                            fields[j] + " is not 0 or 1");
        labels.push_back(static_cast<int>(v));
      } else {
        row.push_back(v);
      }
    }
    features.push_back(std::move(row));
  }
  if (features.empty()) fail(errc::empty_dataset, "'" + path + "' has a header but no rows");

  TabularDataset d;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (static_cast<std::ptrdiff_t>(j) != target_idx) d.feature_names.push_back(header[j]);
  const Eigen::Index n = static_cast<Eigen::Index>(features.size());
  const Eigen::Index p = static_cast<Eigen::Index>(d.feature_names.size());
  d.rows.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) d.rows(i, j) = features[i][j];
  if (target_idx >= 0) {
    Eigen::VectorXi t(n);
    for (Eigen::Index i = 0; i < n; ++i) t(i) = labels[i];
    d.target = std::move(t);
  }
  return d;
}

namespace detail {

// Quote a header cell only when it would otherwise change the field count.
inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace detail

// Full-precision writer; load_csv(write_csv(d)) round-trips bit-exactly.
inline void write_csv(const TabularDataset& d, const std::string& path,
                      const std::string& target_name = "class") {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write '" + path + "'");
  for (std::size_t j = 0; j < d.feature_names.size(); ++j) {
    if (j) out << ',';
    out << detail::csv_cell(d.feature_names[j]);
  }
  if (d.target) out << ',' << detail::csv_cell(target_name);
  out << '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index j = 0; j < d.p(); ++j) {
      if (j) out << ',';
      out << detail::format_double(d.rows(i, j));
    }
    if (d.target) out << ',' << (*d.target)(i);
    out << '\n';
  }
  if (!out) fail(errc::io_error, "short write to '" + path + "'");
}

inline FeatureStats compute_stats(const TabularDataset& d) {
  if (d.n() < 2) fail(errc::too_few_rows, "need n >= 2, got " + std::to_string(d.n()));
  FeatureStats s;
  const Eigen::Index n = d.n(), p = d.p();
  s.means.resize(p);
  s.stdevs.resize(p);
  s.constant.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto col = d.rows.col(j);
    s.means(j) = col.mean();
    if (col.minCoeff() == col.maxCoeff()) {
      s.constant[static_cast<std::size_t>(j)] = true;
      s.stdevs(j) = 0.0;
    } else {
      s.stdevs(j) = std::sqrt((col.array() - s.means(j)).square().sum() / static_cast<double>(n));
    }
  }
  return s;
}

namespace detail {

inline TabularDataset take_rows(const TabularDataset& d, const std::vector<Eigen::Index>& idx) {
  TabularDataset out;
  out.feature_names = d.feature_names;
  out.rows.resize(static_cast<Eigen::Index>(idx.size()), d.p());
  for (std::size_t i = 0; i < idx.size(); ++i) out.rows.row(static_cast<Eigen::Index>(i)) = d.rows.row(idx[i]);
  if (d.target) {
    Eigen::VectorXi t(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) t(static_cast<Eigen::Index>(i)) = (*d.target)(idx[i]);
    out.target = std::move(t);
  }
  return out;
}

}  // namespace detail

// Disjoint, exhaustive train/test partition. Stratified by class when a
// target is present; train gets floor(n_c * (1 - test_fraction)) rows per
// stratum. Both halves keep the original row order.
inline std::pair<TabularDataset, TabularDataset> split(const TabularDataset& d,
                                                       double test_fraction,
                                                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    fail(errc::bad_fraction, "test_fraction must lie in (0,1), got " + std::to_string(test_fraction));
  if (d.n() < 2) fail(errc::too_few_rows, "need n >= 2 to split");

  std::vector<std::vector<Eigen::Index>> strata;
  if (d.target) {
    strata.resize(2);
    for (Eigen::Index i = 0; i < d.n(); ++i) strata[static_cast<std::size_t>((*d.target)(i))].push_back(i);
  } else {
    strata.resize(1);
    for (Eigen::Index i = 0; i < d.n(); ++i) strata[0].push_back(i);
  }

  std::vector<Eigen::Index> train_idx, test_idx;
  for (std::size_t c = 0; c < strata.size(); ++c) {
    auto& members = strata[c];
    if (members.empty()) continue;
    rng::Stream stream(seed, 1000 + c);
    rng::shuffle(members, stream);
    const auto n_c = members.size();
    const auto train_c = static_cast<std::size_t>(
        std::floor(static_cast<double>(n_c) * (1.0 - test_fraction)));
    for (std::size_t i = 0; i < n_c; ++i)
      (i < train_c ? train_idx : test_idx).push_back(members[i]);
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {detail::take_rows(d, train_idx), detail::take_rows(d, test_idx)};
}

}  // namespace glime
