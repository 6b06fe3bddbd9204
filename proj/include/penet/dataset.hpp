// Labeled sample container with CSV serialization and seeded train/test
// splitting. One row per sample: named features plus a springback label.
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "penet/errors.hpp"
#include "penet/rng.hpp"

namespace penet {

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> features;  // rows = samples
  std::vector<double> labels;                 // springback angle (degrees)
  std::string provenance;                      // generator config hash + seed

  std::size_t size() const { return features.size(); }

  void validate() const {
    if (features.size() != labels.size())
      throw schema_error("Dataset: feature row count != label count");
    for (const auto& row : features) {
      if (row.size() != feature_names.size())
        throw schema_error("Dataset: row width does not match schema");
      for (double v : row)
        if (!std::isfinite(v)) throw schema_error("Dataset: non-finite feature");
    }
    for (double v : labels)
      if (!std::isfinite(v)) throw schema_error("Dataset: non-finite label");
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out;
    out.reserve(features.size());
    for (const auto& row : features) out.push_back(row.at(c));
    return out;
  }
};

// 9 significant digits, the dataset CSV number format.
inline std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_csv(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t c = 0; c < ds.feature_names.size(); ++c)
    out << ds.feature_names[c] << ',';
  out << "springback\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.features[i]) out << format_g9(v) << ',';
    out << format_g9(ds.labels[i]) << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

inline Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  Dataset ds;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.empty() || header.back() != "springback")
    throw schema_error("read_csv: last column must be 'springback' in " + path);
  ds.feature_names.assign(header.begin(), header.end() - 1);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      if (used != cell.size())
        throw std::runtime_error("read_csv: bad number '" + cell + "' at " +
                                 path + ":" + std::to_string(line_no));
      values.push_back(v);
    }
    if (values.size() != header.size())
      throw schema_error("read_csv: wrong column count at " + path + ":" +
                         std::to_string(line_no));
    ds.labels.push_back(values.back());
    values.pop_back();
    ds.features.push_back(std::move(values));
  }
  ds.validate();
  return ds;
}

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> test_indices;  // indices into the source dataset
};

// Seeded shuffle, then the first ceil(n * train_frac) samples train and the
// remainder test. Both parts must be non-empty.
inline SplitResult split_dataset(const Dataset& ds, double train_frac,
                                 std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw std::invalid_argument("split_dataset: need 0 < train_frac < 1");
  std::size_t n = ds.size();
  auto n_train = static_cast<std::size_t>(
      std::ceil(static_cast<double>(n) * train_frac));
  if (n_train == 0 || n_train >= n)
    throw std::invalid_argument(
        "split_dataset: dataset too small for a non-empty train and test set");

  auto order = Rng(seed).permutation(n);
  SplitResult out;
  out.train.feature_names = ds.feature_names;
  out.test.feature_names = ds.feature_names;
  out.train.provenance = ds.provenance;
  for (std::size_t k = 0; k < n; ++k) {
    Dataset& part = k < n_train ? out.train : out.test;
    part.features.push_back(ds.features[order[k]]);
    part.labels.push_back(ds.labels[order[k]]);
    if (k >= n_train) out.test_indices.push_back(order[k]);
  }
  std::string idx = "test_indices=";
  for (std::size_t k = 0; k < out.test_indices.size(); ++k)
    idx += (k ? "," : "") + std::to_string(out.test_indices[k]);
  out.test.provenance = ds.provenance.empty() ? idx : ds.provenance + ";" + idx;
  return out;
}

}  // namespace penet
