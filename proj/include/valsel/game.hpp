#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "valsel/models.hpp"

namespace valsel {

// Coalitions are index lists over players {0,...,n-1}; set semantics, any
// order accepted at the API boundary.
using Coalition = std::span<const int>;

// Pure coalition -> per-component utility mapping. Oracles are shareable
// across threads; the evaluation counter is atomic.
class UtilityOracle {
 public:
  virtual ~UtilityOracle() = default;

  int player_count() const { return n_; }
  int component_count() const { return components_; }
  std::uint64_t eval_count() const { return evals_.load(); }

  virtual PerValidationUtility evaluate(Coalition s) const {
    bump();
    return eval_impl(s);
  }

 protected:
  UtilityOracle(int n, int components) : n_(n), components_(components) {}
  void bump() const { evals_.fetch_add(1, std::memory_order_relaxed); }
  virtual PerValidationUtility eval_impl(Coalition s) const = 0;

 private:
  int n_;
  int components_;
  mutable std::atomic<std::uint64_t> evals_{0};
};

// Component-wise u(S+{i}) - u(S). Exactly two oracle evaluations.
Eigen::VectorXd marginal_contribution(const UtilityOracle& oracle, int player,
                                      Coalition s);

// Single-component game defined by a full 2^n lookup table (n <= 20).
class TableGame final : public UtilityOracle {
 public:
  TableGame(int n, std::vector<double> table);

  double value(std::uint32_t mask) const { return table_[mask]; }
  static std::uint32_t mask_of(Coalition s);

  nlohmann::json to_json() const;
  static std::shared_ptr<TableGame> from_json(const nlohmann::json& j);
  static std::shared_ptr<TableGame> load(const std::string& path);
  void save(const std::string& path) const;

 protected:
  PerValidationUtility eval_impl(Coalition s) const override;

 private:
  std::vector<double> table_;
};

std::shared_ptr<UtilityOracle> make_modular_game(const Eigen::VectorXd& weights);

std::shared_ptr<TableGame> make_table_game(int n, std::vector<double> table);

// Arbitrary callable game; used for synthetic fixtures and diagnostics.
class FunctionGame final : public UtilityOracle {
 public:
  using Fn = std::function<Eigen::VectorXd(Coalition)>;
  FunctionGame(int n, int components, Fn fn)
      : UtilityOracle(n, components), fn_(std::move(fn)) {}

 protected:
  PerValidationUtility eval_impl(Coalition s) const override {
    return PerValidationUtility::from_values(fn_(s));
  }

 private:
  Fn fn_;
};

// ML-induced game: players are positions in the feasible list of the split.
std::shared_ptr<UtilityOracle> make_model_game(std::shared_ptr<const TaskSplit> split,
                                               const ModelSpec& spec);

// LRU coalition cache; capacity 0 is a pass-through. The wrapper's counter
// counts only misses.
std::shared_ptr<UtilityOracle> memoize(std::shared_ptr<const UtilityOracle> inner,
                                       std::size_t capacity);

}  // namespace valsel
