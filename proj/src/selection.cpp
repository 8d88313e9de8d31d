#include "valsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "valsel/rng.hpp"

namespace valsel {

AggregatorKind aggregator_kind_from_string(const std::string& s) {
  if (s == "linear") return AggregatorKind::linear;
  if (s == "exp") return AggregatorKind::exp;
  if (s == "pow") return AggregatorKind::pow;
  if (s == "log") return AggregatorKind::log;
  throw std::runtime_error("unknown aggregator kind: " + s);
}

std::string aggregator_kind_name(AggregatorKind k) {
  switch (k) {
    case AggregatorKind::linear: return "linear";
    case AggregatorKind::exp: return "exp";
    case AggregatorKind::pow: return "pow";
    case AggregatorKind::log: return "log";
  }
  return "linear";
}

double eval_aggregator(const AggregatorSpec& agg, double x) {
  switch (agg.kind) {
    case AggregatorKind::linear:
      return x;
    case AggregatorKind::exp:
      if (agg.lambda <= 0.0)
        throw std::runtime_error("eval_aggregator: exp requires lambda > 0");
      return -std::exp(-agg.lambda * x);
    case AggregatorKind::pow:
      if (agg.lambda <= 0.0 || agg.epsilon <= 0.0)
        throw std::runtime_error("eval_aggregator: pow requires lambda, eps > 0");
      if (x + agg.epsilon <= 0.0)
        throw std::runtime_error("eval_aggregator: pow domain violation");
      return -std::pow(x + agg.epsilon, -agg.lambda);
    case AggregatorKind::log:
      if (x + agg.epsilon <= 0.0)
        throw std::runtime_error("eval_aggregator: log domain violation");
      return std::log(x + agg.epsilon);
  }
  return x;
}

nlohmann::json SelectionResult::to_json() const {
  return {{"method", method},
          {"params", params},
          {"selected", selected},
          {"trajectory", objective_trajectory},
          {"per_round_gain", per_round_gain},
          {"matrix_meta", matrix_meta}};
}

void SelectionResult::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("SelectionResult: cannot write " + path);
  out << to_json().dump(2) << "\n";
}

namespace {

nlohmann::json meta_json(const MatrixMeta& m) {
  return {{"estimator", m.estimator},
          {"seed", m.seed},
          {"samples", m.samples},
          {"weight_family", m.weight_family},
          {"tolerance", m.tolerance}};
}

}  // namespace

SelectionResult nash_greedy(const ValuationMatrix& matrix, int m,
                            const AggregatorSpec& agg) {
  const int n = matrix.n();
  const int nv = matrix.components();
  if (m < 1 || m > n) throw std::runtime_error("nash_greedy: m out of range");

  SelectionResult result;
  result.method = "nash";
  result.params = {{"aggregator", aggregator_kind_name(agg.kind)},
                   {"lambda", agg.lambda},
                   {"epsilon", agg.epsilon},
                   {"m", m}};
  result.matrix_meta = meta_json(matrix.meta);

  Eigen::VectorXd running = Eigen::VectorXd::Zero(nv);
  std::vector<char> picked(static_cast<std::size_t>(n), 0);
  double prev_objective = 0.0;
  for (int v = 0; v < nv; ++v)
    prev_objective += eval_aggregator(agg, running(v));

  for (int round = 0; round < m; ++round) {
    double best = -std::numeric_limits<double>::infinity();
    int best_i = -1;
    for (int i = 0; i < n; ++i) {
      if (picked[static_cast<std::size_t>(i)]) continue;
      double obj = 0.0;
      for (int v = 0; v < nv; ++v)
        obj += eval_aggregator(agg, running(v) + matrix.values(i, v));
      if (obj > best) {  // strict: ties keep the lower index
        best = obj;
        best_i = i;
      }
    }
    picked[static_cast<std::size_t>(best_i)] = 1;
    running += matrix.values.row(best_i).transpose();
    result.selected.push_back(best_i);
    result.objective_trajectory.push_back(best);
    result.per_round_gain.push_back(best - prev_objective);
    prev_objective = best;
  }
  return result;
}

SelectionResult top_m(const ValuationMatrix& matrix, int m) {
  const int n = matrix.n();
  if (m < 1 || m > n) throw std::runtime_error("top_m: m out of range");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (matrix.aggregate(a) != matrix.aggregate(b))
      return matrix.aggregate(a) > matrix.aggregate(b);
    return a < b;
  });

  SelectionResult result;
  result.method = "topm";
  result.params = {{"m", m}};
  result.matrix_meta = meta_json(matrix.meta);
  double cumulative = 0.0;
  for (int r = 0; r < m; ++r) {
    const int i = order[static_cast<std::size_t>(r)];
    result.selected.push_back(i);
    cumulative += matrix.aggregate(i);
    result.objective_trajectory.push_back(cumulative);
    result.per_round_gain.push_back(matrix.aggregate(i));
  }
  return result;
}

SelectionResult random_select(int n, int m, std::uint64_t seed) {
  if (m < 0 || m > n) throw std::runtime_error("random_select: m out of range");
  Rng rng = Rng::derive(seed, 0x5e1ec7ULL);
  SelectionResult result;
  result.method = "random";
  result.params = {{"m", m}, {"seed", seed}};
  result.selected = sample_without_replacement(n, m, rng);
  result.objective_trajectory.assign(static_cast<std::size_t>(m), 0.0);
  result.per_round_gain.assign(static_cast<std::size_t>(m), 0.0);
  return result;
}

LambdaFit fit_lambda(const std::vector<std::pair<double, double>>& curve, int n,
                     double uhat_N) {
  if (curve.size() < 3)
    throw std::runtime_error("fit_lambda: need at least 3 curve points");
  if (uhat_N <= 0.0) throw std::runtime_error("fit_lambda: uhat_N must be > 0");
  for (std::size_t j = 1; j < curve.size(); ++j)
    if (curve[j].first <= curve[j - 1].first)
      throw std::runtime_error("fit_lambda: subset sizes must be increasing");

  // Degenerate curve: no overall utility increase to fit a law to.
  double umin = curve.front().second, umax = curve.front().second;
  for (const auto& [mm, uu] : curve) {
    umin = std::min(umin, uu);
    umax = std::max(umax, uu);
  }
  if (umax <= umin || curve.back().second <= curve.front().second)
    throw std::runtime_error(
        "fit_lambda: non-increasing learning curve; supply lambda manually");

  const int points = static_cast<int>(curve.size());
  Eigen::VectorXd u(points);
  for (int j = 0; j < points; ++j) u(j) = curve[static_cast<std::size_t>(j)].second;

  LambdaFit best;
  best.residual = std::numeric_limits<double>::infinity();
  constexpr int kGrid = 200;
  const double lo = std::log(1e-4), hi = std::log(1.0);
  for (int g = 0; g < kGrid; ++g) {
    const double beta = std::exp(lo + (hi - lo) * g / (kGrid - 1));
    Eigen::MatrixXd A(points, 2);
    for (int j = 0; j < points; ++j) {
      A(j, 0) = 1.0;
      A(j, 1) = -std::exp(-beta * curve[static_cast<std::size_t>(j)].first);
    }
    const Eigen::Vector2d sol =
        (A.transpose() * A).ldlt().solve(A.transpose() * u);
    const double residual = (A * sol - u).squaredNorm();
    if (residual < best.residual) {
      best.residual = residual;
      best.beta = beta;
      best.u_max = sol(0);
      best.alpha = sol(1);
    }
  }
  if (best.alpha <= 0.0)
    throw std::runtime_error(
        "fit_lambda: fitted curve is not increasing; supply lambda manually");
  best.lambda = best.beta * n / uhat_N;
  return best;
}

}  // namespace valsel
