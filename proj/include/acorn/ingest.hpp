#pragma once

// Tabular flow records -> feature matrix in [0,1].
//
// Numeric features are robust-scaled ((x - median) / IQR), then min-max
// normalized with statistics frozen at fit time and clamped to [0,1].
// Categorical features expand into one-hot blocks; a value missing from the
// fitted vocabulary maps to an all-zero block.
//
// Quantiles use linear interpolation between order statistics (the
// "type 7" rule): q(p) = x[floor(h)] + (h - floor(h)) * (x[floor(h)+1] - x[floor(h)])
// with h = (n - 1) p on the sorted sample.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "acorn/matrix.hpp"

namespace acorn {

struct ColumnSchema {
  std::string label_column = "label";
  // May name the same column as label_column (e.g. "BENIGN" / "DDoS").
  std::string attack_class_column = "attack_class";
  std::vector<std::string> categorical_columns;
  // When non-empty only these columns are used as numeric features.
  std::vector<std::string> numeric_columns;
  std::vector<std::string> ignore_columns;
  // Label values (case-insensitive) meaning "normal"; anything else is an attack.
  std::vector<std::string> normal_labels = {"0", "normal", "benign"};
};

struct RawDataset {
  std::vector<std::string> numeric_names;
  std::vector<std::string> categorical_names;
  Matrix numeric;                                  // n x p
  std::vector<std::vector<std::string>> categorical;  // n rows of q values
  Labels labels;
  std::vector<std::string> attack_classes;  // "" for normal rows

  std::size_t size() const { return labels.size(); }
};

struct LabeledDataset {
  Matrix x;  // entries in [0,1]
  Labels y;
  std::vector<std::string> classes;
  std::vector<std::string> feature_names;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }
};

struct Preprocessor {
  std::vector<std::string> numeric_names;
  std::vector<std::string> categorical_names;
  std::vector<std::vector<std::string>> vocabularies;
  std::vector<double> medians;
  std::vector<double> scales;
  std::vector<double> mins;
  std::vector<double> maxs;

  std::size_t output_dim() const;
  std::vector<std::string> feature_names() const;

  nlohmann::ordered_json to_json() const;
  static Preprocessor from_json(const nlohmann::json& j);
};

RawDataset load_csv(const std::filesystem::path& path, const ColumnSchema& schema);
RawDataset select_rows(const RawDataset& raw, std::span<const std::size_t> rows);

Preprocessor fit_preprocessor(const RawDataset& raw);
LabeledDataset apply_preprocessor(const Preprocessor& pre, const RawDataset& raw);

// Linear-interpolation quantile of an unsorted sample, p in [0,1].
double quantile(std::vector<double> values, double p);

}  // namespace acorn
