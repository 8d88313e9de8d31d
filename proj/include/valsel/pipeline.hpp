#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "valsel/config.hpp"
#include "valsel/dataset.hpp"
#include "valsel/diagnostics.hpp"
#include "valsel/game.hpp"
#include "valsel/selection.hpp"
#include "valsel/valuation.hpp"

namespace valsel {

// Dataset per config (generated or loaded), split with the given seed, label
// noise applied to the feasible pool when configured.
std::shared_ptr<TaskSplit> build_task(const RunConfig& cfg, std::uint64_t seed);

std::shared_ptr<UtilityOracle> build_oracle(std::shared_ptr<const TaskSplit> split,
                                            const RunConfig& cfg);

// Runs the configured estimator. `split` may be null for non-knn estimators
// driven by a fixture oracle.
ValuationMatrix run_value(const RunConfig& cfg, const UtilityOracle& oracle,
                          const TaskSplit* split, std::uint64_t seed);

// Aggregator with lambda resolved: fixed -> config value; fit -> learning
// curve probe on the oracle (falls back to the configured lambda with a
// warning when the fit is degenerate).
AggregatorSpec resolve_aggregator(const RunConfig& cfg,
                                  const UtilityOracle& oracle,
                                  std::uint64_t seed);

SelectionResult run_select(const ValuationMatrix& matrix,
                           const std::string& method, int m,
                           const AggregatorSpec& agg, std::uint64_t seed);

struct BenchRow {
  std::string method;
  double ratio;
  std::uint64_t seed;
  double accuracy;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::string config_hash;
};

BenchResult run_bench(const RunConfig& cfg);

// Writes `<out>/bench_long.csv` (method,ratio,seed,accuracy) and
// `<out>/bench_agg.csv` (method,ratio,mean,stderr), both prefixed with
// `# config_hash=` comments.
void save_bench(const BenchResult& result, const std::string& out_dir);

// kind: consistent | informativeness | submod. Writes JSON (and scatter CSV
// for informativeness) into out_dir and returns the report.
nlohmann::json run_audit(const RunConfig& cfg, const std::string& kind,
                         const std::string& out_dir);

}  // namespace valsel
