#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "valsel/game.hpp"

namespace valsel {

enum class WeightFamily { shapley, banzhaf, beta, loo, custom };

std::string weight_family_name(WeightFamily f);
WeightFamily weight_family_from_string(const std::string& s);

// Coalition-size weights (w_0 .. w_{n-1}), nonnegative, summing to 1.
struct SemivalueWeights {
  int n = 0;
  Eigen::VectorXd w;
  WeightFamily family = WeightFamily::shapley;
  double alpha = 1.0;
  double beta = 1.0;
};

// shapley: w_s = 1/n; banzhaf: w_s = C(n-1,s)/2^{n-1}; beta(a,b):
// beta-binomial mass with larger alpha weighting smaller coalitions;
// loo: w_{n-1} = 1.
SemivalueWeights semivalue_weights(WeightFamily family, int n,
                                   double alpha = 1.0, double beta = 1.0);

struct MatrixMeta {
  std::string estimator;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::string weight_family = "shapley";
  double tolerance = 0.0;
};

// n x |V| matrix of per-component values plus the aggregate column
// (row-wise mean); the central artifact between estimation and selection.
struct ValuationMatrix {
  Eigen::MatrixXd values;
  Eigen::VectorXd aggregate;
  MatrixMeta meta;
  std::vector<int> feasible_order;  // printed row ids

  int n() const { return static_cast<int>(values.rows()); }
  int components() const { return static_cast<int>(values.cols()); }

  static ValuationMatrix from_values(Eigen::MatrixXd values, MatrixMeta meta,
                                     std::vector<int> order = {});
};

void save_matrix_csv(const ValuationMatrix& m, const std::string& path);
ValuationMatrix load_matrix_csv(const std::string& path);

// Exact enumeration over all 2^n coalitions (n <= 20).
ValuationMatrix exact_semivalue(const UtilityOracle& oracle,
                                const SemivalueWeights& weights);

// Permutation sampling; per-permutation streams derived from (seed, t), so
// the result is independent of the worker count.
ValuationMatrix mc_shapley(const UtilityOracle& oracle, int permutations,
                           std::uint64_t seed, int threads = 1);

// As mc_shapley, but within a permutation all remaining marginals are zeroed
// once |u_V(prefix) - u_V(N)| < tolerance. tolerance = 0 never truncates.
ValuationMatrix tmc_shapley(const UtilityOracle& oracle, int permutations,
                            double tolerance, std::uint64_t seed,
                            int threads = 1);

// Weighted least-squares semivalue regression. size_weights has length n+1
// (per coalition size 0..n); a coalition of size s carries weight
// W_s / C(n,s), so uniform per-coalition weighting corresponds to
// W_s proportional to C(n,s). num_samples < 0 enumerates all coalitions
// (n <= 20). The regression includes an intercept which is dropped from the
// returned values.
ValuationMatrix ls_semivalue(const UtilityOracle& oracle,
                             const Eigen::VectorXd& size_weights,
                             std::int64_t num_samples, std::uint64_t seed);

// Per-size weight vector (length n+1) giving every coalition equal weight;
// with this choice the full-enumeration solution is the Banzhaf value.
Eigen::VectorXd ls_uniform_coalition_weights(int n);

// Closed-form exact Shapley values of the KNN utility, one recursion per
// validation datum.
ValuationMatrix knn_shapley(const TaskSplit& split, int k);

// The fractional KNN utility the recursion above is exact for:
// u_v(S) = (1/K) sum_{k=1}^{min(K,|S|)} I[y_(k) = y_v].
std::shared_ptr<UtilityOracle> make_knn_utility_game(
    std::shared_ptr<const TaskSplit> split, int k);

}  // namespace valsel
