#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "valsel/game.hpp"

namespace valsel {

struct RawTable {
  Eigen::MatrixXd features;  // unstandardized
  Eigen::VectorXd labels;
};

// Two spherical Gaussian clusters at +/- separation/2 along a random unit
// direction; labels 0/1 per cluster.
RawTable make_two_clusters(int rows, int dims, double separation,
                           std::uint64_t seed);

// Harder tabular surrogate: correlated informative block, pure-noise columns,
// a discretized column, and Bernoulli labels from a logit with a quadratic
// term, so full-data logistic accuracy lands around 0.8 rather than 1.0.
RawTable make_wd_like(int rows, int dims, std::uint64_t seed);

// Three-player null-space family: every member has exact Shapley (0,0,0).
std::shared_ptr<TableGame> c2_game(double x, double y, double z);

// Threshold game u(S) = I[sum_{i in S} g_i * a_i >= theta] with a_i > 0 and
// g_i in {+1,-1}: marginals of player i always lie in {0, g_i}.
std::shared_ptr<TableGame> consistent_game(const std::vector<int>& goodness,
                                           const Eigen::VectorXd& magnitudes,
                                           double threshold);

// Convenience: random magnitudes in [0.5, 1.5), threshold = half the total
// positive mass.
std::shared_ptr<TableGame> consistent_game(const std::vector<int>& goodness,
                                           std::uint64_t seed);

}  // namespace valsel
