#include "valsel/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace valsel {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: missing '=' on line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key on line " + std::to_string(lineno));
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: missing key " + key);
  return it->second;
}

std::string KeyValueConfig::get(const std::string& key,
                                const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config: key " + key + " is not a number");
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoi(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config: key " + key + " is not an integer");
  }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoull(get(key));
  } catch (const std::exception&) {
    throw ConfigError("config: key " + key + " is not an unsigned integer");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: key " + key + " is not a boolean");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_commas(get(key))) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config: key " + key + " has a non-numeric entry");
    }
  }
  return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64s(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_commas(get(key))) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      throw ConfigError("config: key " + key + " has a non-integer entry");
    }
  }
  return out;
}

std::vector<std::string> KeyValueConfig::get_strings(const std::string& key) const {
  return split_commas(get(key));
}

std::string KeyValueConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::uint64_t KeyValueConfig::hash() const {
  // FNV-1a 64-bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : canonical()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string KeyValueConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash()));
  return buf;
}

RunConfig RunConfig::from_kv(const KeyValueConfig& kv) {
  RunConfig c;
  c.dataset_kind = kv.get("dataset.kind", c.dataset_kind);
  if (c.dataset_kind != "csv" && c.dataset_kind != "two_clusters" &&
      c.dataset_kind != "wd_like")
    throw ConfigError("config: unknown dataset.kind " + c.dataset_kind);
  c.dataset_path = kv.get("dataset.path", "");
  if (c.dataset_kind == "csv" && c.dataset_path.empty())
    throw ConfigError("config: dataset.kind=csv requires dataset.path");
  c.label_column = kv.get("dataset.label_column", c.label_column);
  c.positive_class = kv.get_double("dataset.positive_class", c.positive_class);
  c.binarize = kv.get_bool("dataset.binarize", c.binarize);
  c.impute_mean = kv.get("dataset.impute", "reject") == "mean";
  c.gen_rows = kv.get_int("dataset.rows", c.gen_rows);
  c.gen_dims = kv.get_int("dataset.dims", c.gen_dims);
  c.gen_separation = kv.get_double("dataset.separation", c.gen_separation);
  c.gen_seed = kv.get_u64("dataset.gen_seed", c.gen_seed);

  c.n_feasible = kv.get_int("split.n_feasible", c.n_feasible);
  c.n_val = kv.get_int("split.n_val", c.n_val);
  c.split_seed = kv.get_u64("split.seed", c.split_seed);
  c.flip_ratio = kv.get_double("noise.flip_ratio", c.flip_ratio);
  if (c.flip_ratio < 0.0 || c.flip_ratio > 1.0)
    throw ConfigError("config: noise.flip_ratio must lie in [0,1]");

  try {
    c.model.kind = model_kind_from_string(kv.get("model.kind", "logistic"));
    c.model.utility =
        utility_kind_from_string(kv.get("model.utility", "correctness"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.model.learning_rate =
      kv.get_double("model.learning_rate", c.model.learning_rate);
  c.model.iterations = kv.get_int("model.iterations", c.model.iterations);
  c.model.l2 = kv.get_double("model.l2", c.model.l2);
  c.model.ridge_lambda = kv.get_double("model.ridge_lambda", c.model.ridge_lambda);
  c.model.k = kv.get_int("model.k", c.model.k);
  if (c.model.k < 1 || c.model.iterations < 1 || c.model.ridge_lambda < 0.0)
    throw ConfigError("config: invalid model hyperparameters");

  c.estimator.name = kv.get("estimator.name", c.estimator.name);
  if (c.estimator.name != "exact" && c.estimator.name != "mc" &&
      c.estimator.name != "tmc" && c.estimator.name != "ls" &&
      c.estimator.name != "knn")
    throw ConfigError("config: unknown estimator.name " + c.estimator.name);
  c.estimator.permutations =
      kv.get_int("estimator.permutations", c.estimator.permutations);
  c.estimator.tolerance =
      kv.get_double("estimator.tolerance", c.estimator.tolerance);
  const std::string samples = kv.get("estimator.samples", "full");
  c.estimator.samples = samples == "full" ? -1 : std::stoll(samples);
  try {
    c.estimator.family =
        weight_family_from_string(kv.get("estimator.weight_family", "shapley"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.estimator.alpha = kv.get_double("estimator.alpha", c.estimator.alpha);
  c.estimator.beta = kv.get_double("estimator.beta", c.estimator.beta);
  if (c.estimator.permutations < 1)
    throw ConfigError("config: estimator.permutations must be >= 1");
  if (c.estimator.tolerance < 0.0)
    throw ConfigError("config: estimator.tolerance must be >= 0");

  try {
    c.aggregator.kind =
        aggregator_kind_from_string(kv.get("aggregator.kind", "exp"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.aggregator.lambda = kv.get_double("aggregator.lambda", c.aggregator.lambda);
  c.aggregator.epsilon = kv.get_double("aggregator.epsilon", c.aggregator.epsilon);
  c.lambda_source = kv.get("aggregator.lambda_source", c.lambda_source);
  if (c.lambda_source != "fixed" && c.lambda_source != "fit")
    throw ConfigError("config: aggregator.lambda_source must be fixed or fit");

  if (kv.has("select.ratios")) c.ratios = kv.get_doubles("select.ratios");
  for (double r : c.ratios)
    if (r <= 0.0 || r > 1.0)
      throw ConfigError("config: select.ratios entries must lie in (0,1]");
  if (kv.has("select.methods")) c.methods = kv.get_strings("select.methods");
  for (const auto& m : c.methods)
    if (m != "random" && m != "topm" && m != "nash")
      throw ConfigError("config: unknown selection method " + m);
  if (kv.has("bench.seeds")) c.seeds = kv.get_u64s("bench.seeds");
  if (c.seeds.empty()) throw ConfigError("config: bench.seeds must be nonempty");

  c.audit_pairs = kv.get_int("audit.pairs", c.audit_pairs);
  c.audit_samples_per_pair =
      kv.get_int("audit.samples_per_pair", c.audit_samples_per_pair);
  c.scan_subsets = kv.get_int("audit.num_subsets", c.scan_subsets);
  c.scan_m = kv.get_int("audit.m", c.scan_m);
  c.submod_pairs = kv.get_int("audit.submod_pairs", c.submod_pairs);
  if (kv.has("audit.removal_fractions"))
    c.removal_fractions = kv.get_doubles("audit.removal_fractions");

  c.game_path = kv.get("game.path", "");

  c.config_hash = kv.hash();
  return c;
}

}  // namespace valsel
