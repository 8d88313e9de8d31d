#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "valsel/config.hpp"
#include "valsel/dataset.hpp"
#include "valsel/format.hpp"
#include "valsel/pipeline.hpp"
#include "valsel/synthetic.hpp"

namespace {

using namespace valsel;

RunConfig load_config(const std::string& path, int threads,
                      std::optional<std::uint64_t> seed) {
  if (path.empty()) throw ConfigError("missing --config");
  KeyValueConfig kv = KeyValueConfig::from_file(path);
  if (seed) kv.set("split.seed", std::to_string(*seed));
  RunConfig cfg = RunConfig::from_kv(kv);
  cfg.threads = threads;
  return cfg;
}

int cmd_gen(const std::string& kind, const std::string& out, int rows, int dims,
            double separation, std::uint64_t seed,
            const std::vector<double>& weights, const std::vector<double>& xyz,
            const std::string& goodness) {
  if (out.empty()) throw ConfigError("gen: missing --out");
  if (kind == "two_clusters" || kind == "wd_like") {
    const RawTable t = kind == "two_clusters"
                           ? make_two_clusters(rows, dims, separation, seed)
                           : make_wd_like(rows, dims, seed);
    write_dataset_csv(out, t.features, t.labels);
  } else if (kind == "modular_game") {
    if (weights.empty()) throw ConfigError("gen: modular_game needs --weights");
    const int n = static_cast<int>(weights.size());
    if (n > 20) throw ConfigError("gen: modular_game limited to n <= 20");
    std::vector<double> table(std::size_t{1} << n, 0.0);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) table[mask] += weights[std::size_t(i)];
    make_table_game(n, std::move(table))->save(out);
  } else if (kind == "c2_game") {
    if (xyz.size() != 3) throw ConfigError("gen: c2_game needs --xyz X Y Z");
    c2_game(xyz[0], xyz[1], xyz[2])->save(out);
  } else if (kind == "consistent_game") {
    if (goodness.empty())
      throw ConfigError("gen: consistent_game needs --goodness (e.g. ++-)");
    std::vector<int> g;
    for (char c : goodness) {
      if (c == '+')
        g.push_back(+1);
      else if (c == '-')
        g.push_back(-1);
      else
        throw ConfigError("gen: goodness must be a string of + and -");
    }
    consistent_game(g, seed)->save(out);
  } else {
    throw ConfigError("gen: unknown kind " + kind);
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_value(const RunConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::shared_ptr<TaskSplit> split = build_task(cfg, cfg.split_seed);
  const std::shared_ptr<UtilityOracle> oracle = build_oracle(split, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  ValuationMatrix matrix = run_value(cfg, *oracle, split.get(), cfg.split_seed);
  const auto t1 = std::chrono::steady_clock::now();
  save_matrix_csv(matrix, out_dir + "/matrix.csv");
  save_split_json(*split, out_dir + "/split.json");
  std::cout << "oracle evaluations: " << oracle->eval_count() << "\n"
            << "wall time: "
            << std::chrono::duration<double>(t1 - t0).count() << " s\n"
            << "wrote " << out_dir << "/matrix.csv\n";
  return 0;
}

int cmd_select(const RunConfig& cfg, const std::string& matrix_path,
               const std::string& method, int m, double ratio,
               const std::string& out_dir) {
  if (matrix_path.empty()) throw ConfigError("select: missing --matrix");
  const ValuationMatrix matrix = load_matrix_csv(matrix_path);
  if (m <= 0) {
    if (ratio <= 0.0 || ratio > 1.0)
      throw ConfigError("select: give --m or --ratio in (0,1]");
    m = std::max(1, static_cast<int>(std::lround(ratio * matrix.n())));
  }
  const SelectionResult sel =
      run_select(matrix, method, m, cfg.aggregator, cfg.split_seed);
  std::filesystem::create_directories(out_dir);
  sel.save(out_dir + "/selection.json");
  std::cout << "wrote " << out_dir << "/selection.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data valuation and selection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path, out_dir = "out";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "run configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--seed", seed, "override split.seed");

  auto* gen = app.add_subcommand("gen", "write synthetic datasets / game fixtures");
  std::string gen_kind, gen_goodness;
  int gen_rows = 400, gen_dims = 5;
  double gen_sep = 3.0;
  std::uint64_t gen_seed = 1;
  std::vector<double> gen_weights, gen_xyz;
  gen->add_option("--kind", gen_kind,
                  "two_clusters|wd_like|modular_game|c2_game|consistent_game")
      ->required();
  gen->add_option("--rows", gen_rows, "row count");
  gen->add_option("--dims", gen_dims, "feature count");
  gen->add_option("--separation", gen_sep, "cluster separation (sigmas)");
  gen->add_option("--gen-seed", gen_seed, "generator seed");
  gen->add_option("--weights", gen_weights, "modular game weights")
      ->delimiter(',');
  gen->add_option("--xyz", gen_xyz, "c2 game parameters")->delimiter(',');
  gen->add_option("--goodness", gen_goodness, "consistent game signs, e.g. ++-");

  auto* value = app.add_subcommand("value", "compute a valuation matrix");
  auto* select = app.add_subcommand("select", "select a subset from a matrix");
  std::string sel_matrix, sel_method = "nash";
  int sel_m = 0;
  double sel_ratio = 0.0;
  select->add_option("--matrix", sel_matrix, "matrix CSV path")->required();
  select->add_option("--method", sel_method, "nash|topm|random");
  select->add_option("--m", sel_m, "subset size");
  select->add_option("--ratio", sel_ratio, "subset size as a fraction of n");

  auto* audit = app.add_subcommand("audit", "diagnostic reports");
  std::string audit_kind = "consistent";
  audit->add_option("--kind", audit_kind, "consistent|informativeness|submod");

  auto* bench = app.add_subcommand("bench", "full selection benchmark");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen(gen_kind, out_dir, gen_rows, gen_dims, gen_sep, gen_seed,
                     gen_weights, gen_xyz, gen_goodness);
    const RunConfig cfg = load_config(config_path, threads, seed);
    if (value->parsed()) return cmd_value(cfg, out_dir);
    if (select->parsed())
      return cmd_select(cfg, sel_matrix, sel_method, sel_m, sel_ratio, out_dir);
    if (audit->parsed()) {
      run_audit(cfg, audit_kind, out_dir);
      std::cout << "wrote audit report to " << out_dir << "\n";
      return 0;
    }
    if (bench->parsed()) {
      const BenchResult result = run_bench(cfg);
      save_bench(result, out_dir);
      std::cout << "wrote " << out_dir << "/bench_long.csv\n";
      return 0;
    }
  } catch (const valsel::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
