#include "valsel/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "valsel/rng.hpp"

namespace valsel {

RawTable make_two_clusters(int rows, int dims, double separation,
                           std::uint64_t seed) {
  if (rows < 2 || dims < 1)
    throw std::runtime_error("make_two_clusters: need rows >= 2, dims >= 1");
  Rng rng = Rng::derive(seed, 0xc1u);

  Eigen::VectorXd direction(dims);
  for (int d = 0; d < dims; ++d) direction(d) = rng.next_normal();
  direction.normalize();

  RawTable table;
  table.features.resize(rows, dims);
  table.labels.resize(rows);
  for (int r = 0; r < rows; ++r) {
    const double cls = (r % 2 == 0) ? 0.0 : 1.0;
    const double sign = cls == 0.0 ? -1.0 : 1.0;
    for (int d = 0; d < dims; ++d)
      table.features(r, d) =
          sign * separation / 2.0 * direction(d) + rng.next_normal();
    table.labels(r) = cls;
  }
  return table;
}

RawTable make_wd_like(int rows, int dims, std::uint64_t seed) {
  if (rows < 2 || dims < 4)
    throw std::runtime_error("make_wd_like: need rows >= 2, dims >= 4");
  Rng rng = Rng::derive(seed, 0x3dbu);

  const int informative = std::max(2, dims / 2);
  Eigen::VectorXd coef(informative);
  for (int d = 0; d < informative; ++d)
    coef(d) = (1.0 + rng.next_double()) * (d % 2 == 0 ? 1.0 : -1.0);

  RawTable table;
  table.features.resize(rows, dims);
  table.labels.resize(rows);
  for (int r = 0; r < rows; ++r) {
    // Shared latent factor induces correlation inside the informative block.
    const double latent = rng.next_normal();
    double logit = 0.0;
    for (int d = 0; d < dims; ++d) {
      double x = rng.next_normal();
      if (d < informative) {
        x = 0.6 * latent + 0.8 * x;
        logit += coef(d) * x;
      }
      if (d == dims - 1) x = std::floor(3.0 * (1.0 / (1.0 + std::exp(-x))));
      table.features(r, d) = x;
    }
    logit = 0.8 * logit + 0.4 * latent * latent - 0.4;
    const double p = 1.0 / (1.0 + std::exp(-logit));
    table.labels(r) = rng.next_double() < p ? 1.0 : 0.0;
  }
  return table;
}

std::shared_ptr<TableGame> c2_game(double x, double y, double z) {
  std::vector<double> table(8, 0.0);
  table[0b001] = -x + z;  // {0}
  table[0b010] = -x + y;  // {1}
  table[0b100] = 0.0;     // {2}
  table[0b011] = x;       // {0,1}
  table[0b101] = y;       // {0,2}
  table[0b110] = z;       // {1,2}
  table[0b111] = 0.0;
  return make_table_game(3, std::move(table));
}

std::shared_ptr<TableGame> consistent_game(const std::vector<int>& goodness,
                                           const Eigen::VectorXd& magnitudes,
                                           double threshold) {
  const int n = static_cast<int>(goodness.size());
  if (n < 1 || n > 20)
    throw std::runtime_error("consistent_game: need 1 <= n <= 20");
  if (magnitudes.size() != n)
    throw std::runtime_error("consistent_game: magnitudes length mismatch");
  if (threshold <= 0.0)
    throw std::runtime_error("consistent_game: threshold must be > 0");
  for (int i = 0; i < n; ++i) {
    if (goodness[static_cast<std::size_t>(i)] != 1 &&
        goodness[static_cast<std::size_t>(i)] != -1)
      throw std::runtime_error("consistent_game: goodness entries must be +1/-1");
    if (magnitudes(i) <= 0.0)
      throw std::runtime_error("consistent_game: magnitudes must be > 0");
  }

  std::vector<double> table(std::size_t{1} << n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double score = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i))
        score += goodness[static_cast<std::size_t>(i)] * magnitudes(i);
    table[mask] = score >= threshold ? 1.0 : 0.0;
  }
  return make_table_game(n, std::move(table));
}

std::shared_ptr<TableGame> consistent_game(const std::vector<int>& goodness,
                                           std::uint64_t seed) {
  const int n = static_cast<int>(goodness.size());
  Rng rng = Rng::derive(seed, 0xc025u);
  Eigen::VectorXd mags(n);
  double positive_mass = 0.0;
  for (int i = 0; i < n; ++i) {
    mags(i) = 0.5 + rng.next_double();
    if (goodness[static_cast<std::size_t>(i)] > 0) positive_mass += mags(i);
  }
  if (positive_mass <= 0.0)
    throw std::runtime_error("consistent_game: need at least one good player");
  return consistent_game(goodness, mags, positive_mass / 2.0);
}

}  // namespace valsel
