#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "valsel/valuation.hpp"

namespace valsel {

enum class AggregatorKind { linear, exp, pow, log };

AggregatorKind aggregator_kind_from_string(const std::string& s);
std::string aggregator_kind_name(AggregatorKind k);

// Concave increasing transform applied to the per-component running sums:
// linear: x; exp: -exp(-lambda x); pow: -(x+eps)^{-lambda}; log: log(x+eps).
struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::exp;
  double lambda = 1.0;
  double epsilon = 1e-6;
};

double eval_aggregator(const AggregatorSpec& agg, double x);

struct SelectionResult {
  std::vector<int> selected;  // in selection order
  std::vector<double> objective_trajectory;
  std::vector<double> per_round_gain;
  std::string method;
  nlohmann::json params;
  nlohmann::json matrix_meta;

  nlohmann::json to_json() const;
  void save(const std::string& path) const;
};

// Greedy maximization of sum_v F(uhat_v(M)); ties break to the lower index.
SelectionResult nash_greedy(const ValuationMatrix& matrix, int m,
                            const AggregatorSpec& agg);

// Sort the aggregate column descending (ties to the lower index), take m.
SelectionResult top_m(const ValuationMatrix& matrix, int m);

SelectionResult random_select(int n, int m, std::uint64_t seed);

struct LambdaFit {
  double lambda = 0.0;
  double beta = 0.0;
  double u_max = 0.0;
  double alpha = 0.0;
  double residual = 0.0;
};

// Fits u(m) ~ u_max - alpha exp(-beta m) by grid search over beta with
// (u_max, alpha) solved linearly; returns lambda = beta * n / uhat_N.
LambdaFit fit_lambda(const std::vector<std::pair<double, double>>& curve, int n,
                     double uhat_N);

}  // namespace valsel
