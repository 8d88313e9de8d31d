#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "valsel/models.hpp"
#include "valsel/selection.hpp"

namespace valsel {

// Configuration problems map to exit code 2 at the CLI; everything else is a
// stage failure (exit 3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` file with dotted section keys; '#' starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;  // comma list
  std::vector<std::uint64_t> get_u64s(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  // Sorted key=value rendering; the config hash is FNV-1a over this text so
  // semantically identical files hash identically.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

 private:
  std::map<std::string, std::string> values_;
};

struct EstimatorSpec {
  std::string name = "mc";  // exact | mc | tmc | ls | knn
  int permutations = 500;
  double tolerance = 0.05;
  std::int64_t samples = -1;  // ls; -1 = full enumeration
  WeightFamily family = WeightFamily::shapley;
  double alpha = 1.0;
  double beta = 1.0;
};

struct RunConfig {
  // dataset
  std::string dataset_kind = "two_clusters";  // csv | two_clusters | wd_like
  std::string dataset_path;
  std::string label_column = "label";
  double positive_class = 1.0;
  bool binarize = false;
  bool impute_mean = false;
  int gen_rows = 400;
  int gen_dims = 5;
  double gen_separation = 3.0;
  std::uint64_t gen_seed = 1;

  // split + noise
  int n_feasible = 40;
  int n_val = 40;
  std::uint64_t split_seed = 1;
  double flip_ratio = 0.0;

  ModelSpec model;
  EstimatorSpec estimator;

  AggregatorSpec aggregator;
  std::string lambda_source = "fixed";  // fixed | fit

  std::vector<double> ratios = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::string> methods = {"random", "topm", "nash"};
  std::vector<std::uint64_t> seeds = {1};

  // diagnostics knobs
  int audit_pairs = 20;
  int audit_samples_per_pair = 1000;
  int scan_subsets = 2000;
  int scan_m = 0;  // 0 -> n/2
  int submod_pairs = 2000;
  std::vector<double> removal_fractions = {0.1, 0.3, 0.5, 0.7, 0.9};

  // When set, audits run against this TableGame fixture instead of the
  // model-induced oracle.
  std::string game_path;

  int threads = 1;
  std::uint64_t config_hash = 0;

  static RunConfig from_kv(const KeyValueConfig& kv);
};

}  // namespace valsel
