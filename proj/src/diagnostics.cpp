#include "valsel/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "valsel/format.hpp"
#include "valsel/rng.hpp"

namespace valsel {

Quantiles compute_quantiles(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  const auto at = [&](double q) {
    const double pos = q * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - lo;
    return values[lo] * (1.0 - frac) + values[hi] * frac;
  };
  return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

namespace {

nlohmann::json quantiles_json(const Quantiles& q) {
  return {{"min", q.min}, {"q25", q.q25}, {"median", q.median},
          {"q75", q.q75}, {"max", q.max}};
}

// Shapley coalition law: size uniform in 0..n-1, then uniform within size.
std::vector<int> sample_coalition_without(int n, int excluded, Rng& rng) {
  const int pool = n - 1;
  const int size = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pool + 1)));
  std::vector<int> others;
  others.reserve(static_cast<std::size_t>(pool));
  for (int j = 0; j < n; ++j)
    if (j != excluded) others.push_back(j);
  for (int i = 0; i < size; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(pool - i)));
    std::swap(others[static_cast<std::size_t>(i)], others[static_cast<std::size_t>(j)]);
  }
  others.resize(static_cast<std::size_t>(size));
  std::sort(others.begin(), others.end());
  return others;
}

}  // namespace

nlohmann::json AuditReport::to_json() const {
  nlohmann::json pj = nlohmann::json::array();
  for (const auto& p : pairs)
    pj.push_back({{"player", p.player},
                  {"component", p.component},
                  {"violation_frequency", p.violation_frequency},
                  {"goodness", p.estimated_goodness}});
  return {{"pairs", pj},
          {"across_players", quantiles_json(across_players)},
          {"across_components", quantiles_json(across_components)},
          {"samples_per_pair", samples_per_pair},
          {"seed", seed},
          {"coalition_law", "size-uniform"}};
}

AuditReport consistent_player_audit(const UtilityOracle& oracle,
                                    const std::vector<std::pair<int, int>>& pairs,
                                    int samples_per_pair, std::uint64_t seed) {
  if (samples_per_pair < 2)
    throw std::runtime_error("consistent_player_audit: need >= 2 samples per pair");
  const int n = oracle.player_count();

  AuditReport report;
  report.samples_per_pair = samples_per_pair;
  report.seed = seed;

  std::uint64_t pair_stream = 0;
  for (const auto& [player, component] : pairs) {
    if (player < 0 || player >= n)
      throw std::runtime_error("consistent_player_audit: player out of range");
    if (component < 0 || component >= oracle.component_count())
      throw std::runtime_error("consistent_player_audit: component out of range");

    std::vector<double> marginals(static_cast<std::size_t>(samples_per_pair));
    double nonzero_sum = 0.0;
    for (int t = 0; t < samples_per_pair; ++t) {
      Rng rng = Rng::derive(seed, (pair_stream << 20) | static_cast<std::uint64_t>(t));
      const std::vector<int> s = sample_coalition_without(n, player, rng);
      const Eigen::VectorXd delta = marginal_contribution(oracle, player, s);
      const double d = delta(component);
      marginals[static_cast<std::size_t>(t)] = d;
      nonzero_sum += d;
    }
    const int goodness = nonzero_sum < 0.0 ? -1 : +1;
    int violations = 0;
    for (double d : marginals) {
      if (d == 0.0) continue;
      if ((d > 0.0 ? +1 : -1) != goodness) ++violations;
    }
    report.pairs.push_back({player, component,
                            static_cast<double>(violations) / samples_per_pair,
                            goodness});
    ++pair_stream;
  }

  // Table-style summaries: mean frequency per player / per component, then
  // quantiles across those means.
  const auto summarize = [&](bool by_player) {
    std::vector<double> sums, counts;
    std::vector<int> keys;
    for (const auto& p : report.pairs) {
      const int key = by_player ? p.player : p.component;
      auto it = std::find(keys.begin(), keys.end(), key);
      std::size_t idx;
      if (it == keys.end()) {
        keys.push_back(key);
        sums.push_back(0.0);
        counts.push_back(0.0);
        idx = keys.size() - 1;
      } else {
        idx = static_cast<std::size_t>(it - keys.begin());
      }
      sums[idx] += p.violation_frequency;
      counts[idx] += 1.0;
    }
    std::vector<double> means;
    for (std::size_t i = 0; i < sums.size(); ++i) means.push_back(sums[i] / counts[i]);
    return compute_quantiles(std::move(means));
  };
  report.across_players = summarize(true);
  report.across_components = summarize(false);
  return report;
}

AuditReport consistent_player_audit_all(const UtilityOracle& oracle,
                                        int samples_per_pair, std::uint64_t seed) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < oracle.player_count(); ++i)
    for (int v = 0; v < oracle.component_count(); ++v) pairs.emplace_back(i, v);
  return consistent_player_audit(oracle, pairs, samples_per_pair, seed);
}

nlohmann::json InformativenessReport::to_json() const {
  nlohmann::json j{{"gamma_defined", gamma_defined},
                   {"m", m},
                   {"n", n},
                   {"seed", seed},
                   {"num_points", scatter.size()}};
  if (gamma_defined) {
    j["mean_given_zero"] = mean_given_zero;
    j["mean_given_one"] = mean_given_one;
    j["gamma"] = gamma;
    j["tau"] = tau;
  }
  return j;
}

void InformativenessReport::save_scatter_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("informativeness: cannot write " + path);
  out << "uhat,u\n";
  for (const auto& [uhat, u] : scatter)
    out << fmt_g17(uhat) << "," << fmt_g17(u) << "\n";
}

namespace {

InformativenessReport finalize_report(InformativenessReport report,
                                      double w0, double s0, double w1, double s1,
                                      bool binary) {
  if (binary && w0 > 0.0 && w1 > 0.0) {
    report.gamma_defined = true;
    report.mean_given_zero = s0 / w0;
    report.mean_given_one = s1 / w1;
    report.gamma = report.mean_given_one - report.mean_given_zero;
    report.tau = report.mean_given_zero + report.gamma / 2.0;
  }
  return report;
}

}  // namespace

InformativenessReport informativeness_scan(const Eigen::VectorXd& phi,
                                           const UtilityOracle& oracle,
                                           int component, int m,
                                           int num_subsets, std::uint64_t seed) {
  if (num_subsets < 10)
    throw std::runtime_error("informativeness_scan: need >= 10 subsets");
  const int n = oracle.player_count();
  if (phi.size() != n)
    throw std::runtime_error("informativeness_scan: phi length mismatch");
  const double p = static_cast<double>(m) / n;

  InformativenessReport report;
  report.m = m;
  report.n = n;
  report.seed = seed;

  double w0 = 0, s0 = 0, w1 = 0, s1 = 0;
  bool binary = true;
  std::vector<int> subset;
  for (int t = 0; t < num_subsets; ++t) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(t) ^ 0x1f0ULL);
    subset.clear();
    double uhat = 0.0;
    for (int i = 0; i < n; ++i) {
      if (rng.next_double() < p) {
        subset.push_back(i);
        uhat += phi(i);
      }
    }
    const double u = oracle.evaluate(subset).values(component);
    report.scatter.emplace_back(uhat, u);
    if (u == 0.0) {
      w0 += 1.0;
      s0 += uhat;
    } else if (u == 1.0) {
      w1 += 1.0;
      s1 += uhat;
    } else {
      binary = false;
    }
  }
  return finalize_report(std::move(report), w0, s0, w1, s1, binary);
}

InformativenessReport informativeness_exact(const Eigen::VectorXd& phi,
                                            const UtilityOracle& oracle,
                                            int component, int m) {
  const int n = oracle.player_count();
  if (n > 20) throw std::runtime_error("informativeness_exact: n > 20");
  if (phi.size() != n)
    throw std::runtime_error("informativeness_exact: phi length mismatch");
  const double p = static_cast<double>(m) / n;

  InformativenessReport report;
  report.m = m;
  report.n = n;

  double w0 = 0, s0 = 0, w1 = 0, s1 = 0;
  bool binary = true;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> subset;
    double uhat = 0.0;
    double weight = 1.0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        subset.push_back(i);
        uhat += phi(i);
        weight *= p;
      } else {
        weight *= 1.0 - p;
      }
    }
    const double u = oracle.evaluate(subset).values(component);
    if (u == 0.0) {
      w0 += weight;
      s0 += weight * uhat;
    } else if (u == 1.0) {
      w1 += weight;
      s1 += weight * uhat;
    } else {
      binary = false;
    }
  }
  return finalize_report(std::move(report), w0, s0, w1, s1, binary);
}

BernsteinDelta bernstein_delta(double gamma, const Eigen::VectorXd& phi, int m,
                               int n) {
  if (gamma <= 0.0) throw std::runtime_error("bernstein_delta: gamma must be > 0");
  if (m < 0 || m > n) throw std::runtime_error("bernstein_delta: m out of range");

  BernsteinDelta out;
  const double frac = static_cast<double>(m) * (n - m) / (static_cast<double>(n) * n);
  out.variance_proxy = frac * phi.array().abs2().sum();
  out.phi_max = phi.size() > 0 ? phi.array().abs().maxCoeff() : 0.0;

  const double denom = 8.0 * out.variance_proxy + (4.0 / 3.0) * out.phi_max * gamma;
  if (denom == 0.0) {
    out.degenerate = true;
    out.delta = 0.0;  // limit of exp(-gamma^2 / denom) as denom -> 0+
  } else {
    out.delta = std::exp(-gamma * gamma / denom);
  }

  if (m == 0 || m == n) {
    // Pr[|M| = m] = 1 under inclusion probability m/n in {0, 1}.
    out.delta_size_conditioned = out.delta;
  } else {
    const double stirling =
        std::exp(1.0 / (12.0 * n + 1.0) - 1.0 / (12.0 * m) -
                 1.0 / (12.0 * (n - m))) /
        std::sqrt(2.0 * std::numbers::pi * m * (static_cast<double>(n) - m) / n);
    out.delta_size_conditioned = out.delta / stirling;
  }
  out.delta = std::clamp(out.delta, 0.0, 1.0);
  out.delta_size_conditioned = std::clamp(out.delta_size_conditioned, 0.0, 1.0);
  return out;
}

CurvatureResult curvature(const UtilityOracle& oracle) {
  const int n = oracle.player_count();
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  const double u_empty = oracle.evaluate(std::vector<int>{}).aggregate;
  const double u_full = oracle.evaluate(all).aggregate;

  CurvatureResult result;
  double min_ratio = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int i = 0; i < n; ++i) {
    const std::vector<int> singleton{i};
    std::vector<int> rest;
    for (int j = 0; j < n; ++j)
      if (j != i) rest.push_back(j);
    const double d_empty = oracle.evaluate(singleton).aggregate - u_empty;
    const double d_full = u_full - oracle.evaluate(rest).aggregate;
    if (d_empty == 0.0) {
      result.excluded.push_back(i);
      continue;
    }
    min_ratio = std::min(min_ratio, d_full / d_empty);
    any = true;
  }
  if (!any)
    throw std::runtime_error("curvature: every player has zero empty-set marginal");
  result.c = 1.0 - min_ratio;
  return result;
}

nlohmann::json SubmodularityEstimate::to_json() const {
  return {{"ratio", ratio}, {"retained", retained}, {"skipped", skipped}};
}

namespace {

double ratio_for_pair(const SetObjective& f, const std::vector<int>& a,
                      const std::vector<int>& b, double denom_floor,
                      bool& retained) {
  std::vector<int> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  std::sort(ab.begin(), ab.end());
  const double fa = f(a);
  const double denom = f(ab) - fa;
  if (denom <= denom_floor) {
    retained = false;
    return 0.0;
  }
  double numer = 0.0;
  for (int i : b) {
    std::vector<int> ai = a;
    ai.push_back(i);
    std::sort(ai.begin(), ai.end());
    numer += f(ai) - fa;
  }
  retained = true;
  return numer / denom;
}

}  // namespace

SubmodularityEstimate submodularity_ratio(const SetObjective& objective, int n,
                                          int num_pairs, std::uint64_t seed,
                                          double denom_floor) {
  if (num_pairs < 1)
    throw std::runtime_error("submodularity_ratio: num_pairs must be >= 1");
  if (denom_floor <= 0.0)
    throw std::runtime_error("submodularity_ratio: denom_floor must be > 0");

  SubmodularityEstimate est;
  est.ratio = std::numeric_limits<double>::infinity();
  for (int t = 0; t < num_pairs; ++t) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(t) ^ 0x5ab0ULL);
    // |A| uniform in 0..n-1, A uniform within size.
    const int asize = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    std::vector<int> perm = random_permutation(n, rng);
    std::vector<int> a(perm.begin(), perm.begin() + asize);
    std::sort(a.begin(), a.end());
    // B: uniform nonempty subset of the complement.
    std::vector<int> complement(perm.begin() + asize, perm.end());
    std::sort(complement.begin(), complement.end());
    std::vector<int> b;
    do {
      b.clear();
      for (int i : complement)
        if (rng.next_u64() & 1) b.push_back(i);
    } while (b.empty());
    bool retained = false;
    const double r = ratio_for_pair(objective, a, b, denom_floor, retained);
    if (retained) {
      est.ratio = std::min(est.ratio, r);
      ++est.retained;
    } else {
      ++est.skipped;
    }
  }
  if (est.retained == 0)
    throw std::runtime_error("submodularity_ratio: no pairs retained (flat objective?)");
  return est;
}

SubmodularityEstimate submodularity_ratio_exact(const SetObjective& objective,
                                                int n, double denom_floor) {
  if (n > 12) throw std::runtime_error("submodularity_ratio_exact: n > 12");

  // Cache objective on every mask.
  std::vector<double> f(std::size_t{1} << n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i);
    f[mask] = objective(s);
  }

  SubmodularityEstimate est;
  est.ratio = std::numeric_limits<double>::infinity();
  for (std::uint32_t a = 0; a < (1u << n); ++a) {
    const std::uint32_t free_mask = ((1u << n) - 1) & ~a;
    // Enumerate nonempty B within the complement.
    for (std::uint32_t b = (free_mask - 1) & free_mask;; b = (b - 1) & free_mask) {
      const std::uint32_t bb = b == 0 ? free_mask : b;
      const double denom = f[a | bb] - f[a];
      if (denom > denom_floor) {
        double numer = 0.0;
        for (int i = 0; i < n; ++i)
          if (bb & (1u << i)) numer += f[a | (1u << i)] - f[a];
        est.ratio = std::min(est.ratio, numer / denom);
        ++est.retained;
      } else {
        ++est.skipped;
      }
      if (b == 0) break;
    }
    if (free_mask == 0) continue;
  }
  if (est.retained == 0)
    throw std::runtime_error("submodularity_ratio_exact: no pairs retained");
  return est;
}

SetObjective nash_objective(const ValuationMatrix& matrix,
                            const AggregatorSpec& agg,
                            const std::vector<int>& players) {
  const Eigen::MatrixXd values = matrix.values;
  const int nv = matrix.components();
  const std::vector<int> ids = players;
  return [values, agg, nv, ids](const std::vector<int>& s) {
    Eigen::VectorXd running = Eigen::VectorXd::Zero(nv);
    for (int local : s)
      running += values.row(ids[static_cast<std::size_t>(local)]).transpose();
    double obj = 0.0;
    for (int v = 0; v < nv; ++v) obj += eval_aggregator(agg, running(v));
    return obj;
  };
}

std::vector<RemovalSweepPoint> removal_sweep(
    const ValuationMatrix& matrix, const AggregatorSpec& agg,
    const std::vector<double>& removed_fractions, int sampled_players,
    int num_pairs, std::uint64_t seed, double denom_floor) {
  const int n = matrix.n();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (matrix.aggregate(a) != matrix.aggregate(b))
      return matrix.aggregate(a) > matrix.aggregate(b);
    return a < b;
  });

  std::vector<RemovalSweepPoint> sweep;
  for (double q : removed_fractions) {
    const int keep = std::max(2, static_cast<int>(std::lround((1.0 - q) * n)));
    std::vector<int> survivors(order.begin(), order.begin() + keep);
    std::sort(survivors.begin(), survivors.end());
    if (static_cast<int>(survivors.size()) > sampled_players) {
      Rng rng = Rng::derive(seed, 0xdeadULL + static_cast<std::uint64_t>(keep));
      const std::vector<int> idx = sample_without_replacement(
          static_cast<int>(survivors.size()), sampled_players, rng);
      std::vector<int> sub;
      for (int j : idx) sub.push_back(survivors[static_cast<std::size_t>(j)]);
      std::sort(sub.begin(), sub.end());
      survivors = std::move(sub);
    }
    const SetObjective f = nash_objective(matrix, agg, survivors);
    RemovalSweepPoint point;
    point.removed_fraction = q;
    point.survivors = static_cast<int>(survivors.size());
    point.estimate = submodularity_ratio(f, static_cast<int>(survivors.size()),
                                         num_pairs, seed, denom_floor);
    sweep.push_back(std::move(point));
  }
  return sweep;
}

}  // namespace valsel
