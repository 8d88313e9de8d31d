#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "valsel/game.hpp"
#include "valsel/selection.hpp"
#include "valsel/valuation.hpp"

namespace valsel {

struct Quantiles {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

Quantiles compute_quantiles(std::vector<double> values);

struct AuditReport {
  struct PairEntry {
    int player;
    int component;
    double violation_frequency;
    int estimated_goodness;  // +1 / -1
  };
  std::vector<PairEntry> pairs;
  Quantiles across_players;
  Quantiles across_components;
  int samples_per_pair = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

// Samples coalitions with the Shapley size-uniform law for each (i, v) pair
// and reports the fraction of marginals whose sign opposes the estimated
// goodness (sign of the mean of nonzero marginals; ties resolve to +1).
AuditReport consistent_player_audit(const UtilityOracle& oracle,
                                    const std::vector<std::pair<int, int>>& pairs,
                                    int samples_per_pair, std::uint64_t seed);

// All (i, v) pairs.
AuditReport consistent_player_audit_all(const UtilityOracle& oracle,
                                        int samples_per_pair, std::uint64_t seed);

struct InformativenessReport {
  std::vector<std::pair<double, double>> scatter;  // (uhat(M), u(M))
  bool gamma_defined = false;
  double mean_given_zero = 0.0;
  double mean_given_one = 0.0;
  double gamma = 0.0;
  double tau = 0.0;  // midpoint threshold
  int m = 0;
  int n = 0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  void save_scatter_csv(const std::string& path) const;
};

// Independent-inclusion sampling with probability m/n; the conditional split
// requires the component utility to be 0/1-valued.
InformativenessReport informativeness_scan(const Eigen::VectorXd& phi,
                                           const UtilityOracle& oracle,
                                           int component, int m,
                                           int num_subsets, std::uint64_t seed);

// Exact conditional expectations by enumerating all 2^n subsets under the
// inclusion-probability model (n <= 20).
InformativenessReport informativeness_exact(const Eigen::VectorXd& phi,
                                            const UtilityOracle& oracle,
                                            int component, int m);

struct BernsteinDelta {
  double delta = 0.0;
  double delta_size_conditioned = 0.0;
  double variance_proxy = 0.0;  // m(n-m)/n^2 * sum phi_i^2
  double phi_max = 0.0;
  bool degenerate = false;  // all-zero phi vector
};

BernsteinDelta bernstein_delta(double gamma, const Eigen::VectorXd& phi, int m,
                               int n);

struct CurvatureResult {
  double c = 0.0;
  std::vector<int> excluded;  // players with zero empty-set marginal
};

// c = 1 - min_i Delta(i | N\{i}) / Delta(i | empty) on the aggregate
// component; 2n+2 evaluations.
CurvatureResult curvature(const UtilityOracle& oracle);

using SetObjective = std::function<double(const std::vector<int>&)>;

struct SubmodularityEstimate {
  double ratio = 0.0;
  int retained = 0;
  int skipped = 0;

  nlohmann::json to_json() const;
};

SubmodularityEstimate submodularity_ratio(const SetObjective& objective, int n,
                                          int num_pairs, std::uint64_t seed,
                                          double denom_floor = 1e-9);

// Exhaustive minimum over every disjoint (A, nonempty B) pair (n <= 12).
SubmodularityEstimate submodularity_ratio_exact(const SetObjective& objective,
                                                int n,
                                                double denom_floor = 1e-9);

// Objective M -> sum_v F(sum_{i in M} phi_{i,v}) over a restricted player set.
SetObjective nash_objective(const ValuationMatrix& matrix,
                            const AggregatorSpec& agg,
                            const std::vector<int>& players);

struct RemovalSweepPoint {
  double removed_fraction;
  int survivors;
  SubmodularityEstimate estimate;
};

// Drops the bottom-q fraction by aggregate value and re-estimates the
// submodularity ratio of the NASH objective restricted to the survivors.
std::vector<RemovalSweepPoint> removal_sweep(
    const ValuationMatrix& matrix, const AggregatorSpec& agg,
    const std::vector<double>& removed_fractions, int sampled_players,
    int num_pairs, std::uint64_t seed, double denom_floor = 1e-9);

}  // namespace valsel
