#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace valsel {

struct ColumnSchema {
  std::string label_column;
  // NaN policy: reject by default, mean-impute when enabled.
  bool impute_mean = false;
};

// Tabular pool of examples. Features are standardized per column (zero mean,
// unit variance over the loaded rows); labels are class indices or real
// targets depending on the downstream model.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
  std::vector<std::int64_t> row_ids;
  std::vector<std::string> feature_names;
  // Set when binarization produced all-zero labels.
  bool degenerate_labels = false;

  int rows() const { return static_cast<int>(features.rows()); }
  int cols() const { return static_cast<int>(features.cols()); }
};

Dataset load_csv(const std::string& path, const ColumnSchema& schema);

// Labels become I[y == positive_class].
Dataset binarize_labels(const Dataset& ds, double positive_class);

// Feasible/validation index lists into a shared dataset. Disjoint by
// construction; read-only after construction.
struct TaskSplit {
  Dataset dataset;
  std::vector<int> feasible;
  std::vector<int> validation;
  std::vector<int> flipped;  // feasible-pool row indices with flipped labels
  std::uint64_t seed = 0;
  std::uint64_t noise_seed = 0;

  int n() const { return static_cast<int>(feasible.size()); }
  int n_val() const { return static_cast<int>(validation.size()); }
};

TaskSplit make_split(const Dataset& ds, int n_feasible, int n_val,
                     std::uint64_t seed);

// Flips exactly round(flip_ratio * n) distinct feasible labels (0 <-> 1).
// Validation labels are untouched; the flipped set is recorded.
TaskSplit inject_label_noise(const TaskSplit& split, double flip_ratio,
                             std::uint64_t seed);

nlohmann::json split_metadata_json(const TaskSplit& split);
void save_split_json(const TaskSplit& split, const std::string& path);

// Writes a raw (unstandardized) dataset as CSV with a header row; the label
// column is written last under the given name.
void write_dataset_csv(const std::string& path, const Eigen::MatrixXd& features,
                       const Eigen::VectorXd& labels,
                       const std::string& label_name = "label");

}  // namespace valsel
