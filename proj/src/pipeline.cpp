#include "valsel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include "valsel/format.hpp"
#include "valsel/rng.hpp"
#include "valsel/synthetic.hpp"

namespace valsel {

namespace {

Dataset dataset_from_raw(const RawTable& raw) {
  Dataset ds;
  ds.features = raw.features;
  ds.labels = raw.labels;
  ds.row_ids.resize(static_cast<std::size_t>(raw.features.rows()));
  for (int r = 0; r < raw.features.rows(); ++r)
    ds.row_ids[static_cast<std::size_t>(r)] = r;
  for (int c = 0; c < raw.features.cols(); ++c)
    ds.feature_names.push_back("f" + std::to_string(c));
  const int n = ds.rows();
  for (int c = 0; c < ds.cols(); ++c) {
    const double mean = ds.features.col(c).mean();
    ds.features.col(c).array() -= mean;
    const double sd = std::sqrt(ds.features.col(c).squaredNorm() / n);
    if (sd > 0.0) ds.features.col(c) /= sd;
  }
  return ds;
}

Dataset build_dataset(const RunConfig& cfg) {
  if (cfg.dataset_kind == "csv") {
    Dataset ds = load_csv(cfg.dataset_path,
                          ColumnSchema{cfg.label_column, cfg.impute_mean});
    if (cfg.binarize) ds = binarize_labels(ds, cfg.positive_class);
    return ds;
  }
  if (cfg.dataset_kind == "two_clusters")
    return dataset_from_raw(make_two_clusters(cfg.gen_rows, cfg.gen_dims,
                                              cfg.gen_separation, cfg.gen_seed));
  return dataset_from_raw(make_wd_like(cfg.gen_rows, cfg.gen_dims, cfg.gen_seed));
}

}  // namespace

std::shared_ptr<TaskSplit> build_task(const RunConfig& cfg, std::uint64_t seed) {
  const Dataset ds = build_dataset(cfg);
  TaskSplit split = make_split(ds, cfg.n_feasible, cfg.n_val, seed);
  if (cfg.flip_ratio > 0.0)
    split = inject_label_noise(split, cfg.flip_ratio, seed ^ 0xf1a9ULL);
  return std::make_shared<TaskSplit>(std::move(split));
}

std::shared_ptr<UtilityOracle> build_oracle(std::shared_ptr<const TaskSplit> split,
                                            const RunConfig& cfg) {
  return memoize(make_model_game(std::move(split), cfg.model), 1u << 16);
}

ValuationMatrix run_value(const RunConfig& cfg, const UtilityOracle& oracle,
                          const TaskSplit* split, std::uint64_t seed) {
  const EstimatorSpec& est = cfg.estimator;
  ValuationMatrix m;
  if (est.name == "exact") {
    m = exact_semivalue(oracle, semivalue_weights(est.family,
                                                  oracle.player_count(),
                                                  est.alpha, est.beta));
  } else if (est.name == "mc") {
    m = mc_shapley(oracle, est.permutations, seed, cfg.threads);
  } else if (est.name == "tmc") {
    m = tmc_shapley(oracle, est.permutations, est.tolerance, seed, cfg.threads);
  } else if (est.name == "ls") {
    m = ls_semivalue(oracle, ls_uniform_coalition_weights(oracle.player_count()),
                     est.samples, seed);
  } else {  // knn
    if (split == nullptr)
      throw std::runtime_error("run_value: knn estimator needs a task split");
    if (cfg.model.kind != ModelKind::knn)
      throw std::runtime_error("run_value: knn estimator requires model.kind=knn");
    m = knn_shapley(*split, cfg.model.k);
  }
  if (split != nullptr) m.feasible_order = split->feasible;
  return m;
}

AggregatorSpec resolve_aggregator(const RunConfig& cfg,
                                  const UtilityOracle& oracle,
                                  std::uint64_t seed) {
  AggregatorSpec agg = cfg.aggregator;
  if (cfg.lambda_source != "fit") return agg;
  if (agg.kind != AggregatorKind::exp && agg.kind != AggregatorKind::pow)
    return agg;

  const int n = oracle.player_count();
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  const double uhat_n = oracle.evaluate(all).aggregate;

  // Learning-curve probe: mean utility at a ladder of subset sizes.
  std::vector<std::pair<double, double>> curve;
  std::uint64_t stream = 0xf17ULL;
  int prev = 0;
  for (int j = 1; j <= 8; ++j) {
    const int m = std::max(1, static_cast<int>(std::lround(n * j / 8.0)));
    if (m <= prev) continue;
    prev = m;
    double sum = 0.0;
    const int reps = 3;
    for (int k = 0; k < reps; ++k) {
      Rng rng = Rng::derive(seed, stream++);
      std::vector<int> subset = sample_without_replacement(n, m, rng);
      std::sort(subset.begin(), subset.end());
      sum += oracle.evaluate(subset).aggregate;
    }
    curve.emplace_back(m, sum / reps);
  }
  try {
    if (uhat_n <= 0.0)
      throw std::runtime_error("resolve_aggregator: u(N) <= 0");
    agg.lambda = fit_lambda(curve, n, uhat_n).lambda;
  } catch (const std::exception& e) {
    std::cerr << "warning: lambda fit failed (" << e.what()
              << "); keeping lambda=" << agg.lambda << "\n";
  }
  return agg;
}

SelectionResult run_select(const ValuationMatrix& matrix,
                           const std::string& method, int m,
                           const AggregatorSpec& agg, std::uint64_t seed) {
  if (method == "nash") return nash_greedy(matrix, m, agg);
  if (method == "topm") return top_m(matrix, m);
  if (method == "random") return random_select(matrix.n(), m, seed);
  throw std::runtime_error("run_select: unknown method " + method);
}

BenchResult run_bench(const RunConfig& cfg) {
  BenchResult result;
  {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(cfg.config_hash));
    result.config_hash = buf;
  }

  struct Key {
    std::size_t method;
    std::size_t ratio;
    std::size_t seed;
    bool operator<(const Key& o) const {
      if (method != o.method) return method < o.method;
      if (ratio != o.ratio) return ratio < o.ratio;
      return seed < o.seed;
    }
  };
  std::map<Key, double> accuracy;

  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    const std::uint64_t seed = cfg.seeds[si];
    const std::shared_ptr<TaskSplit> split = build_task(cfg, seed);
    const std::shared_ptr<UtilityOracle> oracle = build_oracle(split, cfg);
    const ValuationMatrix matrix = run_value(cfg, *oracle, split.get(), seed);
    const AggregatorSpec agg = resolve_aggregator(cfg, *oracle, seed);

    for (std::size_t ri = 0; ri < cfg.ratios.size(); ++ri) {
      const int m = std::max(
          1, static_cast<int>(std::lround(cfg.ratios[ri] * split->n())));
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const SelectionResult sel =
            run_select(matrix, cfg.methods[mi], m, agg, seed);
        std::vector<int> coalition = sel.selected;
        std::sort(coalition.begin(), coalition.end());
        const double acc =
            evaluate_subset(*split, cfg.model, coalition).aggregate;
        accuracy[{mi, ri, si}] = acc;
      }
    }
  }

  for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
    for (std::size_t ri = 0; ri < cfg.ratios.size(); ++ri)
      for (std::size_t si = 0; si < cfg.seeds.size(); ++si)
        result.rows.push_back({cfg.methods[mi], cfg.ratios[ri], cfg.seeds[si],
                               accuracy.at({mi, ri, si})});
  return result;
}

void save_bench(const BenchResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/bench_long.csv");
    if (!out) throw std::runtime_error("save_bench: cannot write bench_long.csv");
    out << "# config_hash=" << result.config_hash << "\n";
    out << "method,ratio,seed,accuracy\n";
    for (const auto& r : result.rows)
      out << r.method << "," << fmt_g17(r.ratio) << "," << r.seed << ","
          << fmt_g17(r.accuracy) << "\n";
  }
  {
    std::ofstream out(out_dir + "/bench_agg.csv");
    if (!out) throw std::runtime_error("save_bench: cannot write bench_agg.csv");
    out << "# config_hash=" << result.config_hash << "\n";
    out << "method,ratio,mean,stderr\n";
    std::vector<std::pair<std::string, double>> order;
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (const auto& r : result.rows) {
      const auto key = std::make_pair(r.method, r.ratio);
      if (!groups.count(key)) order.push_back(key);
      groups[key].push_back(r.accuracy);
    }
    for (const auto& key : order) {
      const auto& xs = groups.at(key);
      const double mean =
          std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
      double se = 0.0;
      if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        se = std::sqrt(ss / (xs.size() - 1)) / std::sqrt(double(xs.size()));
      }
      out << key.first << "," << fmt_g17(key.second) << "," << fmt_g17(mean)
          << "," << fmt_g17(se) << "\n";
    }
  }
}

nlohmann::json run_audit(const RunConfig& cfg, const std::string& kind,
                         const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  char hash_buf[17];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                static_cast<unsigned long long>(cfg.config_hash));

  std::shared_ptr<TaskSplit> split;
  std::shared_ptr<UtilityOracle> oracle;
  if (!cfg.game_path.empty()) {
    oracle = TableGame::load(cfg.game_path);
  } else {
    split = build_task(cfg, cfg.split_seed);
    oracle = build_oracle(split, cfg);
  }
  const int n = oracle->player_count();
  const int nv = oracle->component_count();

  nlohmann::json report;
  report["config_hash"] = hash_buf;
  report["kind"] = kind;

  if (kind == "consistent") {
    std::vector<std::pair<int, int>> pairs;
    if (static_cast<long long>(n) * nv <= cfg.audit_pairs) {
      for (int i = 0; i < n; ++i)
        for (int v = 0; v < nv; ++v) pairs.emplace_back(i, v);
    } else {
      Rng rng = Rng::derive(cfg.split_seed, 0xa0d17ULL);
      std::set<std::pair<int, int>> seen;
      while (static_cast<int>(pairs.size()) < cfg.audit_pairs) {
        const int i = static_cast<int>(rng.next_below(std::uint64_t(n)));
        const int v = static_cast<int>(rng.next_below(std::uint64_t(nv)));
        if (seen.insert({i, v}).second) pairs.emplace_back(i, v);
      }
    }
    const AuditReport audit = consistent_player_audit(
        *oracle, pairs, cfg.audit_samples_per_pair, cfg.split_seed);
    report["report"] = audit.to_json();
    std::ofstream(out_dir + "/audit_consistent.json") << report.dump(2) << "\n";
    return report;
  }

  if (kind == "informativeness") {
    const ValuationMatrix matrix =
        run_value(cfg, *oracle, split.get(), cfg.split_seed);
    const int m = cfg.scan_m > 0 ? cfg.scan_m : n / 2;
    const Eigen::VectorXd phi = matrix.values.col(0);
    const InformativenessReport scan = informativeness_scan(
        phi, *oracle, 0, m, cfg.scan_subsets, cfg.split_seed);
    report["report"] = scan.to_json();
    if (scan.gamma_defined && scan.gamma > 0.0) {
      const BernsteinDelta bd = bernstein_delta(scan.gamma, phi, m, n);
      report["bernstein"] = {{"delta", bd.delta},
                             {"delta_size_conditioned", bd.delta_size_conditioned},
                             {"variance_proxy", bd.variance_proxy},
                             {"phi_max", bd.phi_max},
                             {"degenerate", bd.degenerate}};
    }
    scan.save_scatter_csv(out_dir + "/informativeness_scatter.csv");
    std::ofstream(out_dir + "/audit_informativeness.json")
        << report.dump(2) << "\n";
    return report;
  }

  if (kind == "submod") {
    const ValuationMatrix matrix =
        run_value(cfg, *oracle, split.get(), cfg.split_seed);
    std::vector<int> all(static_cast<std::size_t>(matrix.n()));
    std::iota(all.begin(), all.end(), 0);
    const int sampled_players = std::min(matrix.n(), 30);
    std::vector<int> players = all;
    if (matrix.n() > sampled_players) {
      Rng rng = Rng::derive(cfg.split_seed, 0x50bULL);
      players = sample_without_replacement(matrix.n(), sampled_players, rng);
      std::sort(players.begin(), players.end());
    }
    const SetObjective f = nash_objective(matrix, cfg.aggregator, players);
    const SubmodularityEstimate est = submodularity_ratio(
        f, static_cast<int>(players.size()), cfg.submod_pairs, cfg.split_seed);
    report["estimate"] = est.to_json();
    const std::vector<RemovalSweepPoint> sweep = removal_sweep(
        matrix, cfg.aggregator, cfg.removal_fractions, sampled_players,
        std::min(cfg.submod_pairs, 500), cfg.split_seed, 1e-9);
    nlohmann::json sj = nlohmann::json::array();
    for (const auto& p : sweep)
      sj.push_back({{"removed_fraction", p.removed_fraction},
                    {"survivors", p.survivors},
                    {"estimate", p.estimate.to_json()}});
    report["removal_sweep"] = sj;
    std::ofstream(out_dir + "/audit_submod.json") << report.dump(2) << "\n";
    return report;
  }

  throw ConfigError("run_audit: unknown audit kind " + kind);
}

}  // namespace valsel
