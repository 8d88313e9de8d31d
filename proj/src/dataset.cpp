#include "valsel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "valsel/format.hpp"
#include "valsel/rng.hpp"

namespace valsel {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const ColumnSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file: " + path);
  const std::vector<std::string> header = split_line(line);

  int label_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == schema.label_column) label_col = static_cast<int>(c);
  }
  if (label_col < 0)
    throw std::runtime_error("load_csv: label column '" + schema.label_column +
                             "' absent in " + path);

  const int ncols = static_cast<int>(header.size());
  const int nfeat = ncols - 1;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> missing;
  std::vector<double> labels;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (static_cast<int>(fields.size()) != ncols)
      throw std::runtime_error("load_csv: row " + std::to_string(lineno) +
                               " has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(ncols));
    std::vector<double> feat(static_cast<std::size_t>(nfeat));
    std::vector<bool> miss(static_cast<std::size_t>(nfeat), false);
    int fi = 0;
    for (int c = 0; c < ncols; ++c) {
      const std::string cell = trim(fields[static_cast<std::size_t>(c)]);
      double value = 0.0;
      bool is_missing = cell.empty();
      if (!is_missing) {
        try {
          std::size_t pos = 0;
          value = std::stod(cell, &pos);
          if (pos != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
          throw std::runtime_error("load_csv: non-numeric cell '" + cell +
                                   "' at row " + std::to_string(lineno));
        }
        if (!std::isfinite(value)) is_missing = true;
      }
      if (c == label_col) {
        if (is_missing)
          throw std::runtime_error("load_csv: missing/NaN label at row " +
                                   std::to_string(lineno));
        labels.push_back(value);
      } else {
        if (is_missing && !schema.impute_mean)
          throw std::runtime_error("load_csv: NaN/missing feature at row " +
                                   std::to_string(lineno) +
                                   " (enable impute=mean to accept)");
        feat[static_cast<std::size_t>(fi)] = value;
        miss[static_cast<std::size_t>(fi)] = is_missing;
        ++fi;
      }
    }
    rows.push_back(std::move(feat));
    missing.push_back(std::move(miss));
  }
  if (rows.empty()) throw std::runtime_error("load_csv: no data rows in " + path);

  const int n = static_cast<int>(rows.size());
  Dataset ds;
  ds.features.resize(n, nfeat);
  ds.labels.resize(n);
  ds.row_ids.resize(static_cast<std::size_t>(n));
  for (int c = 0; c < ncols; ++c) {
    if (c == label_col) continue;
    ds.feature_names.push_back(trim(header[static_cast<std::size_t>(c)]));
  }
  for (int r = 0; r < n; ++r) {
    ds.labels(r) = labels[static_cast<std::size_t>(r)];
    ds.row_ids[static_cast<std::size_t>(r)] = r;
    for (int c = 0; c < nfeat; ++c)
      ds.features(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }

  // Mean imputation before standardization when enabled.
  if (schema.impute_mean) {
    for (int c = 0; c < nfeat; ++c) {
      double sum = 0.0;
      int cnt = 0;
      for (int r = 0; r < n; ++r) {
        if (!missing[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) {
          sum += ds.features(r, c);
          ++cnt;
        }
      }
      const double mean = cnt > 0 ? sum / cnt : 0.0;
      for (int r = 0; r < n; ++r)
        if (missing[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)])
          ds.features(r, c) = mean;
    }
  }

  // Per-column standardization over the loaded rows.
  for (int c = 0; c < nfeat; ++c) {
    const double mean = ds.features.col(c).mean();
    ds.features.col(c).array() -= mean;
    const double var = ds.features.col(c).squaredNorm() / n;
    const double sd = std::sqrt(var);
    if (sd > 0.0) ds.features.col(c) /= sd;
  }
  return ds;
}

Dataset binarize_labels(const Dataset& ds, double positive_class) {
  Dataset out = ds;
  bool any_positive = false;
  for (int r = 0; r < ds.rows(); ++r) {
    const bool pos = ds.labels(r) == positive_class;
    out.labels(r) = pos ? 1.0 : 0.0;
    any_positive = any_positive || pos;
  }
  out.degenerate_labels = !any_positive;
  return out;
}

TaskSplit make_split(const Dataset& ds, int n_feasible, int n_val,
                     std::uint64_t seed) {
  if (n_feasible < 0 || n_val < 0 || n_feasible + n_val > ds.rows())
    throw std::runtime_error("make_split: insufficient rows (" +
                             std::to_string(ds.rows()) + ") for " +
                             std::to_string(n_feasible) + "+" +
                             std::to_string(n_val));
  Rng rng = Rng::derive(seed, 0x5eedULL);
  std::vector<int> drawn =
      sample_without_replacement(ds.rows(), n_feasible + n_val, rng);
  TaskSplit split;
  split.dataset = ds;
  split.feasible.assign(drawn.begin(), drawn.begin() + n_feasible);
  split.validation.assign(drawn.begin() + n_feasible, drawn.end());
  std::sort(split.feasible.begin(), split.feasible.end());
  std::sort(split.validation.begin(), split.validation.end());
  split.seed = seed;
  return split;
}

TaskSplit inject_label_noise(const TaskSplit& split, double flip_ratio,
                             std::uint64_t seed) {
  if (flip_ratio < 0.0 || flip_ratio > 1.0)
    throw std::runtime_error("inject_label_noise: flip_ratio outside [0,1]");
  for (int idx : split.feasible) {
    const double y = split.dataset.labels(idx);
    if (y != 0.0 && y != 1.0)
      throw std::runtime_error("inject_label_noise: feasible labels must be binary");
  }
  const int n = split.n();
  const int flips = static_cast<int>(std::floor(flip_ratio * n + 0.5));
  TaskSplit out = split;
  out.noise_seed = seed;
  out.flipped.clear();
  if (flips == 0) return out;
  Rng rng = Rng::derive(seed, 0xf11bULL);
  std::vector<int> chosen = sample_without_replacement(n, flips, rng);
  std::sort(chosen.begin(), chosen.end());
  for (int pos : chosen) {
    const int row = split.feasible[static_cast<std::size_t>(pos)];
    out.dataset.labels(row) = 1.0 - out.dataset.labels(row);
    out.flipped.push_back(pos);
  }
  return out;
}

nlohmann::json split_metadata_json(const TaskSplit& split) {
  nlohmann::json j;
  j["feasible"] = split.feasible;
  j["validation"] = split.validation;
  j["flipped"] = split.flipped;
  j["seed"] = split.seed;
  j["noise_seed"] = split.noise_seed;
  return j;
}

void save_split_json(const TaskSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_split_json: cannot write " + path);
  out << split_metadata_json(split).dump(2) << "\n";
}

void write_dataset_csv(const std::string& path, const Eigen::MatrixXd& features,
                       const Eigen::VectorXd& labels,
                       const std::string& label_name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot write " + path);
  const int nfeat = static_cast<int>(features.cols());
  for (int c = 0; c < nfeat; ++c) out << "f" << c << ",";
  out << label_name << "\n";
  for (int r = 0; r < features.rows(); ++r) {
    for (int c = 0; c < nfeat; ++c) out << fmt_g17(features(r, c)) << ",";
    out << fmt_g17(labels(r)) << "\n";
  }
}

}  // namespace valsel
