#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bba/common.hpp"
#include "bba/rng.hpp"

namespace bba {

// Spambase layout: 57 feature columns then the {0,1} label. The two
// capital-run-length columns (55 and 56, zero-based) hold integer counts and
// are dropped, leaving 55 continuous features.
constexpr int kSpambaseRawFeatures = 57;
constexpr int kSpambaseColumns = kSpambaseRawFeatures + 1;
constexpr std::array<int, 2> kSpambaseIntegerColumns{55, 56};
constexpr int kSpambaseFeatures = 55;

struct Dataset {
  Matrix features;          // rows x kept features
  std::vector<int> labels;  // 1 = spam, 0 = ham
  std::string source;

  int rows() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }

  int count_label(int value) const {
    int c = 0;
    for (int v : labels) {
      if (v == value) ++c;
    }
    return c;
  }
};

/// Reads a comma-separated spambase-format file: 57 feature columns plus a
/// {0,1} label per row. Errors name the offending row and column.
inline Dataset load_spambase(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open dataset: " + path);

  std::vector<std::array<double, kSpambaseColumns>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<double, kSpambaseColumns> row{};
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= kSpambaseColumns) break;
      std::size_t used = 0;
      try {
        row[col] = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size() || cell.empty()) {
        throw DataError("dataset " + path + ": row " +
                        std::to_string(line_no) + ", column " +
                        std::to_string(col + 1) + ": bad value '" + cell +
                        "'");
      }
      ++col;
    }
    if (col != kSpambaseColumns) {
      throw DataError("dataset " + path + ": row " + std::to_string(line_no) +
                      " has " + std::to_string(col) + " columns, expected " +
                      std::to_string(kSpambaseColumns));
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw DataError("dataset " + path + ": no rows");

  Dataset data;
  data.source = path;
  data.features.resize(static_cast<Eigen::Index>(rows.size()),
                       kSpambaseFeatures);
  data.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int out = 0;
    for (int c = 0; c < kSpambaseRawFeatures; ++c) {
      if (c == kSpambaseIntegerColumns[0] || c == kSpambaseIntegerColumns[1]) {
        continue;
      }
      data.features(static_cast<Eigen::Index>(i), out++) = rows[i][c];
    }
    const double label = rows[i][kSpambaseRawFeatures];
    if (label != 0.0 && label != 1.0) {
      throw DataError("dataset " + path + ": row " + std::to_string(i + 1) +
                      ": label must be 0 or 1");
    }
    data.labels.push_back(static_cast<int>(label));
  }
  return data;
}

struct TrainTestSplit {
  std::vector<int> train_rows;
  std::vector<int> test_rows;
};

/// Uniform split without replacement; the complement keeps dataset order
/// relative to the shuffled permutation tail.
inline TrainTestSplit split_rows(int n, int train_count, Rng& rng) {
  if (train_count <= 0 || train_count >= n) {
    throw std::invalid_argument("split_rows: bad train count");
  }
  std::vector<int> perm = permutation(n, rng);
  TrainTestSplit split;
  split.train_rows.assign(perm.begin(), perm.begin() + train_count);
  split.test_rows.assign(perm.begin() + train_count, perm.end());
  return split;
}

}  // namespace bba
