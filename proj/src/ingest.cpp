#include "acorn/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "acorn/csv.hpp"
#include "acorn/errors.hpp"

namespace acorn {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string row_tag(std::size_t row) { return "row " + std::to_string(row) + ": "; }

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

RawDataset load_csv(const std::filesystem::path& path, const ColumnSchema& schema) {
  if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
  csv::Table table = csv::read(path);
  const auto& header = table.header;

  auto find = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const std::ptrdiff_t label_col = find(schema.label_column);
  if (label_col < 0) throw DataError("missing label column '" + schema.label_column + "'");
  const std::ptrdiff_t class_col = find(schema.attack_class_column);
  if (class_col < 0) {
    throw DataError("missing attack-class column '" + schema.attack_class_column + "'");
  }

  RawDataset raw;
  std::vector<std::size_t> numeric_idx;
  std::vector<std::size_t> categorical_idx;
  for (const auto& name : schema.categorical_columns) {
    const auto c = find(name);
    if (c < 0) throw DataError("missing categorical column '" + name + "'");
    categorical_idx.push_back(static_cast<std::size_t>(c));
    raw.categorical_names.push_back(name);
  }
  if (!schema.numeric_columns.empty()) {
    for (const auto& name : schema.numeric_columns) {
      const auto c = find(name);
      if (c < 0) throw DataError("missing numeric column '" + name + "'");
      numeric_idx.push_back(static_cast<std::size_t>(c));
      raw.numeric_names.push_back(name);
    }
  } else {
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& name = header[c];
      if (static_cast<std::ptrdiff_t>(c) == label_col ||
          static_cast<std::ptrdiff_t>(c) == class_col || contains(schema.categorical_columns, name) ||
          contains(schema.ignore_columns, name)) {
        continue;
      }
      numeric_idx.push_back(c);
      raw.numeric_names.push_back(name);
    }
  }

  std::vector<std::string> normal_values;
  for (const auto& v : schema.normal_labels) normal_values.push_back(lower(v));

  const std::size_t n = table.rows.size();
  raw.numeric.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(numeric_idx.size()));
  raw.categorical.reserve(n);
  raw.labels.reserve(n);
  raw.attack_classes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cells = table.rows[i];
    const std::size_t row_no = i + 1;
    if (static_cast<std::size_t>(label_col) >= cells.size() ||
        trim(cells[static_cast<std::size_t>(label_col)]).empty()) {
      throw DataError(row_tag(row_no) + "missing label");
    }
    if (cells.size() != header.size()) {
      throw DataError(row_tag(row_no) + "expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(cells.size()));
    }
    const std::string label = trim(cells[static_cast<std::size_t>(label_col)]);
    const bool is_normal = contains(normal_values, lower(label));
    raw.labels.push_back(is_normal ? 0 : 1);
    if (is_normal) {
      raw.attack_classes.emplace_back();
    } else {
      std::string cls = trim(cells[static_cast<std::size_t>(class_col)]);
      if (cls.empty()) throw DataError(row_tag(row_no) + "attack row without attack class");
      raw.attack_classes.push_back(std::move(cls));
    }
    for (std::size_t k = 0; k < numeric_idx.size(); ++k) {
      bool ok = false;
      const double v = csv::parse_double(cells[numeric_idx[k]], ok);
      if (!ok || !std::isfinite(v)) {
        throw DataError(row_tag(row_no) + "column " + header[numeric_idx[k]] + ": not a number");
      }
      raw.numeric(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
    std::vector<std::string> cats;
    cats.reserve(categorical_idx.size());
    for (auto c : categorical_idx) cats.push_back(trim(cells[c]));
    raw.categorical.push_back(std::move(cats));
  }
  return raw;
}

RawDataset select_rows(const RawDataset& raw, std::span<const std::size_t> rows) {
  RawDataset out;
  out.numeric_names = raw.numeric_names;
  out.categorical_names = raw.categorical_names;
  out.numeric = take_rows(raw.numeric, rows);
  for (auto r : rows) {
    out.categorical.push_back(raw.categorical[r]);
    out.labels.push_back(raw.labels[r]);
    out.attack_classes.push_back(raw.attack_classes[r]);
  }
  return out;
}

std::size_t Preprocessor::output_dim() const {
  std::size_t d = medians.size();
  for (const auto& v : vocabularies) d += v.size();
  return d;
}

std::vector<std::string> Preprocessor::feature_names() const {
  std::vector<std::string> names = numeric_names;
  for (std::size_t c = 0; c < vocabularies.size(); ++c) {
    for (const auto& value : vocabularies[c]) names.push_back(categorical_names[c] + "=" + value);
  }
  return names;
}

nlohmann::ordered_json Preprocessor::to_json() const {
  nlohmann::ordered_json j;
  j["vocabularies"] = vocabularies;
  j["medians"] = medians;
  j["scales"] = scales;
  j["mins"] = mins;
  j["maxs"] = maxs;
  j["numeric_columns"] = numeric_names;
  j["categorical_columns"] = categorical_names;
  return j;
}

Preprocessor Preprocessor::from_json(const nlohmann::json& j) {
  Preprocessor p;
  try {
    p.vocabularies = j.at("vocabularies").get<std::vector<std::vector<std::string>>>();
    p.medians = j.at("medians").get<std::vector<double>>();
    p.scales = j.at("scales").get<std::vector<double>>();
    p.mins = j.at("mins").get<std::vector<double>>();
    p.maxs = j.at("maxs").get<std::vector<double>>();
    p.numeric_names = j.at("numeric_columns").get<std::vector<std::string>>();
    p.categorical_names = j.at("categorical_columns").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed preprocessor: ") + e.what());
  }
  const std::size_t p_num = p.medians.size();
  if (p.scales.size() != p_num || p.mins.size() != p_num || p.maxs.size() != p_num ||
      p.numeric_names.size() != p_num || p.vocabularies.size() != p.categorical_names.size()) {
    throw DataError("malformed preprocessor: inconsistent lengths");
  }
  return p;
}

Preprocessor fit_preprocessor(const RawDataset& raw) {
  if (raw.size() == 0) throw DataError("cannot fit preprocessor on an empty dataset");
  Preprocessor p;
  p.numeric_names = raw.numeric_names;
  p.categorical_names = raw.categorical_names;

  const Eigen::Index n = raw.numeric.rows();
  for (Eigen::Index c = 0; c < raw.numeric.cols(); ++c) {
    std::vector<double> col(raw.numeric.col(c).begin(), raw.numeric.col(c).end());
    const double median = quantile(col, 0.5);
    const double iqr = quantile(col, 0.75) - quantile(col, 0.25);
    const double scale = iqr > 0.0 ? iqr : 1.0;
    double lo = (col[0] - median) / scale;
    double hi = lo;
    for (Eigen::Index i = 1; i < n; ++i) {
      const double v = (col[static_cast<std::size_t>(i)] - median) / scale;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    p.medians.push_back(median);
    p.scales.push_back(scale);
    p.mins.push_back(lo);
    p.maxs.push_back(hi);
  }

  for (std::size_t c = 0; c < raw.categorical_names.size(); ++c) {
    std::set<std::string> vocab;
    for (const auto& row : raw.categorical) vocab.insert(row[c]);
    p.vocabularies.emplace_back(vocab.begin(), vocab.end());
  }
  return p;
}

LabeledDataset apply_preprocessor(const Preprocessor& pre, const RawDataset& raw) {
  if (raw.numeric_names != pre.numeric_names || raw.categorical_names != pre.categorical_names) {
    throw DataError("dataset columns do not match the fitted preprocessor");
  }
  const std::size_t n = raw.size();
  const std::size_t p_num = pre.medians.size();
  LabeledDataset out;
  out.x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pre.output_dim()));
  out.y = raw.labels;
  out.classes = raw.attack_classes;
  out.feature_names = pre.feature_names();

  std::vector<std::map<std::string, std::size_t>> lookup(pre.vocabularies.size());
  for (std::size_t c = 0; c < pre.vocabularies.size(); ++c) {
    for (std::size_t k = 0; k < pre.vocabularies[c].size(); ++k) lookup[c][pre.vocabularies[c][k]] = k;
  }

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (std::size_t f = 0; f < p_num; ++f) {
      const double scaled = (raw.numeric(row, static_cast<Eigen::Index>(f)) - pre.medians[f]) / pre.scales[f];
      const double span = pre.maxs[f] - pre.mins[f];
      const double v = span > 0.0 ? (scaled - pre.mins[f]) / span : 0.0;
      out.x(row, static_cast<Eigen::Index>(f)) = std::clamp(v, 0.0, 1.0);
    }
    std::size_t offset = p_num;
    for (std::size_t c = 0; c < lookup.size(); ++c) {
      auto it = lookup[c].find(raw.categorical[i][c]);
      if (it != lookup[c].end()) out.x(row, static_cast<Eigen::Index>(offset + it->second)) = 1.0;
      offset += pre.vocabularies[c].size();
    }
  }
  return out;
}

}  // namespace acorn
