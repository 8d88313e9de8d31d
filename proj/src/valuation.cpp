#include "valsel/valuation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "valsel/format.hpp"
#include "valsel/rng.hpp"

namespace valsel {

std::string weight_family_name(WeightFamily f) {
  switch (f) {
    case WeightFamily::shapley: return "shapley";
    case WeightFamily::banzhaf: return "banzhaf";
    case WeightFamily::beta: return "beta";
    case WeightFamily::loo: return "loo";
    case WeightFamily::custom: return "custom";
  }
  return "custom";
}

WeightFamily weight_family_from_string(const std::string& s) {
  if (s == "shapley") return WeightFamily::shapley;
  if (s == "banzhaf") return WeightFamily::banzhaf;
  if (s == "beta") return WeightFamily::beta;
  if (s == "loo") return WeightFamily::loo;
  if (s == "custom") return WeightFamily::custom;
  throw std::runtime_error("unknown semivalue family: " + s);
}

namespace {

double log_binom(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binom(int n, int k) { return std::round(std::exp(log_binom(n, k))); }

std::vector<int> mask_to_coalition(std::uint32_t mask, int n) {
  std::vector<int> s;
  for (int i = 0; i < n; ++i)
    if (mask & (1u << i)) s.push_back(i);
  return s;
}

// Fixed block partition of [0, total): the accumulation granularity is
// independent of the worker count, so merged sums are bit-identical at any
// thread count.
constexpr int kReductionBlocks = 32;

void run_blocks(int num_blocks, int threads,
                const std::function<void(int)>& body) {
  if (threads <= 1) {
    for (int b = 0; b < num_blocks; ++b) body(b);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int b = next.fetch_add(1);
      if (b >= num_blocks) return;
      body(b);
    }
  };
  std::vector<std::thread> pool;
  const int k = std::min(threads, num_blocks);
  pool.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace

SemivalueWeights semivalue_weights(WeightFamily family, int n, double alpha,
                                   double beta) {
  if (n < 1) throw std::runtime_error("semivalue_weights: n must be >= 1");
  SemivalueWeights sw;
  sw.n = n;
  sw.family = family;
  sw.alpha = alpha;
  sw.beta = beta;
  sw.w.resize(n);
  switch (family) {
    case WeightFamily::shapley:
      sw.w.setConstant(1.0 / n);
      break;
    case WeightFamily::banzhaf:
      for (int s = 0; s < n; ++s)
        sw.w(s) = std::exp(log_binom(n - 1, s) - (n - 1) * std::log(2.0));
      break;
    case WeightFamily::beta: {
      if (alpha < 1.0 || beta < 1.0)
        throw std::runtime_error("semivalue_weights: beta requires alpha,beta >= 1");
      // Beta-binomial over coalition size with the shape parameters oriented
      // so that larger alpha concentrates mass on smaller coalitions;
      // alpha = beta = 1 reduces to the uniform (Shapley) weights.
      const double logB = std::lgamma(alpha) + std::lgamma(beta) -
                          std::lgamma(alpha + beta);
      for (int s = 0; s < n; ++s) {
        const double lb = std::lgamma(n - 1 - s + alpha) + std::lgamma(s + beta) -
                          std::lgamma(n - 1 + alpha + beta);
        sw.w(s) = std::exp(log_binom(n - 1, s) + lb - logB);
      }
      sw.w /= sw.w.sum();
      break;
    }
    case WeightFamily::loo:
      sw.w.setZero();
      sw.w(n - 1) = 1.0;
      break;
    case WeightFamily::custom:
      throw std::runtime_error("semivalue_weights: custom weights are caller-supplied");
  }
  const double total = sw.w.sum();
  if (std::abs(total - 1.0) > 1e-12) sw.w /= total;
  return sw;
}

ValuationMatrix ValuationMatrix::from_values(Eigen::MatrixXd values,
                                             MatrixMeta meta,
                                             std::vector<int> order) {
  ValuationMatrix m;
  m.aggregate = values.rowwise().mean();
  m.values = std::move(values);
  m.meta = std::move(meta);
  if (order.empty()) {
    order.resize(static_cast<std::size_t>(m.values.rows()));
    for (int i = 0; i < m.values.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
  }
  m.feasible_order = std::move(order);
  return m;
}

void save_matrix_csv(const ValuationMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_matrix_csv: cannot write " + path);
  out << "# estimator=" << m.meta.estimator << "\n";
  out << "# seed=" << m.meta.seed << "\n";
  out << "# samples=" << m.meta.samples << "\n";
  out << "# weight_family=" << m.meta.weight_family << "\n";
  out << "# tolerance=" << fmt_g17(m.meta.tolerance) << "\n";
  out << "id";
  for (int v = 0; v < m.components(); ++v) out << ",phi_v" << v;
  out << ",aggregate\n";
  for (int i = 0; i < m.n(); ++i) {
    out << m.feasible_order[static_cast<std::size_t>(i)];
    for (int v = 0; v < m.components(); ++v) out << "," << fmt_g17(m.values(i, v));
    out << "," << fmt_g17(m.aggregate(i)) << "\n";
  }
}

ValuationMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_matrix_csv: cannot open " + path);
  MatrixMeta meta;
  std::string line;
  std::vector<std::vector<double>> rows;
  std::vector<int> ids;
  int ncols = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      const std::string val = line.substr(eq + 1);
      if (key == "estimator") meta.estimator = val;
      else if (key == "seed") meta.seed = std::stoull(val);
      else if (key == "samples") meta.samples = std::stoull(val);
      else if (key == "weight_family") meta.weight_family = val;
      else if (key == "tolerance") meta.tolerance = std::stod(val);
      continue;
    }
    if (line.rfind("id", 0) == 0) continue;  // header
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool first = true;
    int id = 0;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        id = std::stoi(cell);
        first = false;
      } else {
        row.push_back(std::stod(cell));
      }
    }
    if (ncols < 0) ncols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != ncols)
      throw std::runtime_error("load_matrix_csv: ragged row in " + path);
    ids.push_back(id);
    rows.push_back(std::move(row));
  }
  if (rows.empty() || ncols < 2)
    throw std::runtime_error("load_matrix_csv: malformed matrix file " + path);
  const int n = static_cast<int>(rows.size());
  const int v = ncols - 1;  // last column is the aggregate
  Eigen::MatrixXd values(n, v);
  Eigen::VectorXd aggregate(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < v; ++c) values(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    aggregate(i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(v)];
  }
  ValuationMatrix m;
  m.values = std::move(values);
  m.aggregate = std::move(aggregate);
  m.meta = std::move(meta);
  m.feasible_order = std::move(ids);
  return m;
}

ValuationMatrix exact_semivalue(const UtilityOracle& oracle,
                                const SemivalueWeights& weights) {
  const int n = oracle.player_count();
  if (n > 20) throw std::runtime_error("exact_semivalue: n > 20 not enumerable");
  if (weights.n != n) throw std::runtime_error("exact_semivalue: weight length mismatch");
  const int nv = oracle.component_count();
  const std::size_t total = std::size_t{1} << n;

  std::vector<Eigen::VectorXd> vals(total);
  for (std::size_t mask = 0; mask < total; ++mask) {
    const std::vector<int> s = mask_to_coalition(static_cast<std::uint32_t>(mask), n);
    vals[mask] = oracle.evaluate(s).values;
  }

  Eigen::VectorXd coeff(n);
  for (int s = 0; s < n; ++s) coeff(s) = weights.w(s) / binom(n - 1, s);

  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, nv);
  for (std::size_t mask = 0; mask < total; ++mask) {
    const int s = std::popcount(mask);
    if (s >= n) continue;
    for (int i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) continue;
      phi.row(i) +=
          coeff(s) * (vals[mask | (std::size_t{1} << i)] - vals[mask]).transpose();
    }
  }
  MatrixMeta meta;
  meta.estimator = "exact";
  meta.weight_family = weight_family_name(weights.family);
  return ValuationMatrix::from_values(std::move(phi), std::move(meta));
}

namespace {

ValuationMatrix permutation_sampler(const UtilityOracle& oracle, int permutations,
                                    double tolerance, bool truncated,
                                    std::uint64_t seed, int threads) {
  if (permutations < 1)
    throw std::runtime_error("mc_shapley: permutation count must be >= 1");
  const int n = oracle.player_count();
  const int nv = oracle.component_count();

  const Eigen::VectorXd empty_values =
      oracle.evaluate(std::vector<int>{}).values;
  double full_aggregate = 0.0;
  if (truncated) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    full_aggregate = oracle.evaluate(all).aggregate;
  }

  const int num_blocks = std::min(permutations, kReductionBlocks);
  std::vector<Eigen::MatrixXd> partial(
      static_cast<std::size_t>(num_blocks));

  run_blocks(num_blocks, threads, [&](int b) {
    const int t_begin = static_cast<int>(
        static_cast<std::int64_t>(b) * permutations / num_blocks);
    const int t_end = static_cast<int>(
        static_cast<std::int64_t>(b + 1) * permutations / num_blocks);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, nv);
    std::vector<int> prefix;
    prefix.reserve(static_cast<std::size_t>(n));
    for (int t = t_begin; t < t_end; ++t) {
      Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(t));
      const std::vector<int> perm = random_permutation(n, rng);
      prefix.clear();
      Eigen::VectorXd prev = empty_values;
      double prev_aggregate = prev.size() > 0 ? prev.mean() : 0.0;
      bool truncate_rest = false;
      for (int k = 0; k < n; ++k) {
        const int player = perm[static_cast<std::size_t>(k)];
        if (truncated && !truncate_rest &&
            std::abs(prev_aggregate - full_aggregate) < tolerance) {
          truncate_rest = true;
        }
        if (truncate_rest) continue;  // zero marginal, no evaluation
        prefix.push_back(player);
        std::vector<int> sorted = prefix;
        std::sort(sorted.begin(), sorted.end());
        const PerValidationUtility cur = oracle.evaluate(sorted);
        acc.row(player) += (cur.values - prev).transpose();
        prev = cur.values;
        prev_aggregate = cur.aggregate;
      }
    }
    partial[static_cast<std::size_t>(b)] = std::move(acc);
  });

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, nv);
  for (const auto& p : partial) sum += p;
  sum /= static_cast<double>(permutations);

  MatrixMeta meta;
  meta.estimator = truncated ? "tmc" : "mc";
  meta.seed = seed;
  meta.samples = static_cast<std::uint64_t>(permutations);
  meta.tolerance = truncated ? tolerance : 0.0;
  return ValuationMatrix::from_values(std::move(sum), std::move(meta));
}

}  // namespace

ValuationMatrix mc_shapley(const UtilityOracle& oracle, int permutations,
                           std::uint64_t seed, int threads) {
  return permutation_sampler(oracle, permutations, 0.0, false, seed, threads);
}

ValuationMatrix tmc_shapley(const UtilityOracle& oracle, int permutations,
                            double tolerance, std::uint64_t seed, int threads) {
  if (tolerance < 0.0)
    throw std::runtime_error("tmc_shapley: tolerance must be >= 0");
  if (tolerance == 0.0)
    return permutation_sampler(oracle, permutations, 0.0, false, seed, threads);
  return permutation_sampler(oracle, permutations, tolerance, true, seed, threads);
}

Eigen::VectorXd ls_uniform_coalition_weights(int n) {
  Eigen::VectorXd w(n + 1);
  for (int s = 0; s <= n; ++s) w(s) = std::exp(log_binom(n, s) - n * std::log(2.0));
  return w;
}

ValuationMatrix ls_semivalue(const UtilityOracle& oracle,
                             const Eigen::VectorXd& size_weights,
                             std::int64_t num_samples, std::uint64_t seed) {
  const int n = oracle.player_count();
  const int nv = oracle.component_count();
  if (size_weights.size() != n + 1)
    throw std::runtime_error("ls_semivalue: size_weights must have length n+1");
  if ((size_weights.array() < 0.0).any() || size_weights.sum() <= 0.0)
    throw std::runtime_error("ls_semivalue: size weights must be nonnegative, not all zero");

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n + 1, n + 1);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 1, nv);
  Eigen::VectorXd x(n + 1);

  auto accumulate = [&](Coalition s, double weight) {
    x.setZero();
    for (int i : s) x(i) = 1.0;
    x(n) = 1.0;  // intercept
    const Eigen::VectorXd u = oracle.evaluate(s).values;
    gram.noalias() += weight * x * x.transpose();
    rhs.noalias() += weight * x * u.transpose();
  };

  if (num_samples < 0) {
    if (n > 20) throw std::runtime_error("ls_semivalue: full enumeration needs n <= 20");
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      const int s = std::popcount(mask);
      if (size_weights(s) <= 0.0) continue;
      const double w = size_weights(s) / binom(n, s);
      accumulate(mask_to_coalition(mask, n), w);
    }
  } else {
    if (num_samples < n)
      throw std::runtime_error("ls_semivalue: num_samples must be >= n");
    // Cumulative size distribution proportional to W_s.
    Eigen::VectorXd cdf(n + 1);
    double acc = 0.0;
    for (int s = 0; s <= n; ++s) {
      acc += size_weights(s);
      cdf(s) = acc;
    }
    cdf /= acc;
    for (std::int64_t t = 0; t < num_samples; ++t) {
      Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(t) ^ 0x15a3ULL);
      const double r = rng.next_double();
      int s = 0;
      while (s < n && r >= cdf(s)) ++s;
      std::vector<int> coalition = sample_without_replacement(n, s, rng);
      std::sort(coalition.begin(), coalition.end());
      accumulate(coalition, 1.0);
    }
  }

  gram.diagonal().array() += 1e-10;  // rank-deficient sampled designs
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error(
        "ls_semivalue: singular system after jitter; increase num_samples");
  const Eigen::MatrixXd psi = ldlt.solve(rhs);

  MatrixMeta meta;
  meta.estimator = "ls";
  meta.seed = num_samples < 0 ? 0 : seed;
  meta.samples = num_samples < 0 ? 0 : static_cast<std::uint64_t>(num_samples);
  meta.weight_family = "custom";
  return ValuationMatrix::from_values(psi.topRows(n), std::move(meta));
}

namespace {

// Neighbor order of the feasible pool around one validation datum:
// increasing distance, ties to the lower feasible position.
std::vector<int> neighbor_order(const TaskSplit& split, int validation_row) {
  const int n = split.n();
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
  const Eigen::RowVectorXd q = split.dataset.features.row(validation_row);
  for (int i = 0; i < n; ++i) {
    const int row = split.feasible[static_cast<std::size_t>(i)];
    dist[static_cast<std::size_t>(i)] = {
        (split.dataset.features.row(row) - q).squaredNorm(), i};
  }
  std::sort(dist.begin(), dist.end());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = dist[static_cast<std::size_t>(i)].second;
  return order;
}

}  // namespace

ValuationMatrix knn_shapley(const TaskSplit& split, int k) {
  if (k < 1) throw std::runtime_error("knn_shapley: K must be >= 1");
  const int n = split.n();
  const int nv = split.n_val();
  if (n < 1 || nv < 1)
    throw std::runtime_error("knn_shapley: feasible and validation must be nonempty");

  Eigen::MatrixXd phi(n, nv);
  for (int v = 0; v < nv; ++v) {
    const int vrow = split.validation[static_cast<std::size_t>(v)];
    const double yv = split.dataset.labels(vrow);
    const std::vector<int> order = neighbor_order(split, vrow);
    Eigen::VectorXd col(n);
    // Farthest neighbor first, then the recursion toward the nearest.
    double next_phi = 0.0;
    double next_ind = 0.0;
    for (int rank = n; rank >= 1; --rank) {
      const int pos = order[static_cast<std::size_t>(rank - 1)];
      const int row = split.feasible[static_cast<std::size_t>(pos)];
      const double ind = split.dataset.labels(row) == yv ? 1.0 : 0.0;
      double value;
      if (rank == n) {
        value = ind / n;
      } else {
        value = next_phi +
                (ind - next_ind) / k * (std::min(k, rank) / static_cast<double>(rank));
      }
      col(pos) = value;
      next_phi = value;
      next_ind = ind;
    }
    phi.col(v) = col;
  }
  MatrixMeta meta;
  meta.estimator = "knn_shapley";
  return ValuationMatrix::from_values(std::move(phi), std::move(meta));
}

std::shared_ptr<UtilityOracle> make_knn_utility_game(
    std::shared_ptr<const TaskSplit> split, int k) {
  const int n = split->n();
  const int nv = split->n_val();
  auto fn = [split, k, n, nv](Coalition s) {
    Eigen::VectorXd values(nv);
    std::vector<char> in_set(static_cast<std::size_t>(n), 0);
    for (int i : s) in_set[static_cast<std::size_t>(i)] = 1;
    for (int v = 0; v < nv; ++v) {
      const int vrow = split->validation[static_cast<std::size_t>(v)];
      const double yv = split->dataset.labels(vrow);
      const std::vector<int> order = neighbor_order(*split, vrow);
      double sum = 0.0;
      int taken = 0;
      for (int pos : order) {
        if (!in_set[static_cast<std::size_t>(pos)]) continue;
        const int row = split->feasible[static_cast<std::size_t>(pos)];
        if (split->dataset.labels(row) == yv) sum += 1.0;
        if (++taken == k) break;
      }
      values(v) = sum / k;
    }
    return values;
  };
  return std::make_shared<FunctionGame>(n, nv, std::move(fn));
}

}  // namespace valsel
