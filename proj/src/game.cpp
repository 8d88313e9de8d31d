#include "valsel/game.hpp"

#include <algorithm>
#include <fstream>
#include <list>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace valsel {

Eigen::VectorXd marginal_contribution(const UtilityOracle& oracle, int player,
                                      Coalition s) {
  if (player < 0 || player >= oracle.player_count())
    throw std::runtime_error("marginal_contribution: player out of range");
  std::vector<int> with(s.begin(), s.end());
  if (std::find(with.begin(), with.end(), player) != with.end())
    throw std::runtime_error("marginal_contribution: player already in coalition");
  with.push_back(player);
  std::sort(with.begin(), with.end());
  const PerValidationUtility hi = oracle.evaluate(with);
  const PerValidationUtility lo = oracle.evaluate(s);
  return hi.values - lo.values;
}

TableGame::TableGame(int n, std::vector<double> table)
    : UtilityOracle(n, 1), table_(std::move(table)) {
  if (n < 1 || n > 20) throw std::runtime_error("TableGame: n must be in [1,20]");
  if (table_.size() != (std::size_t{1} << n))
    throw std::runtime_error("TableGame: table must cover all 2^n coalitions");
  if (table_[0] != 0.0) throw std::runtime_error("TableGame: u(empty) must be 0");
}

std::uint32_t TableGame::mask_of(Coalition s) {
  std::uint32_t mask = 0;
  for (int i : s) mask |= (1u << i);
  return mask;
}

PerValidationUtility TableGame::eval_impl(Coalition s) const {
  for (int i : s)
    if (i < 0 || i >= player_count())
      throw std::runtime_error("TableGame: coalition index out of range");
  Eigen::VectorXd v(1);
  v(0) = table_[mask_of(s)];
  return PerValidationUtility::from_values(std::move(v));
}

nlohmann::json TableGame::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t mask = 0; mask < table_.size(); ++mask)
    entries.push_back({mask, table_[mask]});
  return {{"n", player_count()}, {"entries", entries}};
}

std::shared_ptr<TableGame> TableGame::from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  if (n < 1 || n > 20) throw std::runtime_error("TableGame: n must be in [1,20]");
  std::vector<double> table(std::size_t{1} << n);
  std::vector<bool> seen(table.size(), false);
  for (const auto& e : j.at("entries")) {
    const std::size_t mask = e.at(0).get<std::size_t>();
    if (mask >= table.size())
      throw std::runtime_error("TableGame: entry mask out of range");
    table[mask] = e.at(1).get<double>();
    seen[mask] = true;
  }
  for (std::size_t mask = 0; mask < seen.size(); ++mask)
    if (!seen[mask])
      throw std::runtime_error("TableGame: incomplete table, missing mask " +
                               std::to_string(mask));
  return std::make_shared<TableGame>(n, std::move(table));
}

std::shared_ptr<TableGame> TableGame::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("TableGame: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

void TableGame::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("TableGame: cannot write " + path);
  out << to_json().dump() << "\n";
}

std::shared_ptr<TableGame> make_table_game(int n, std::vector<double> table) {
  return std::make_shared<TableGame>(n, std::move(table));
}

namespace {

class ModularGame final : public UtilityOracle {
 public:
  explicit ModularGame(Eigen::VectorXd weights)
      : UtilityOracle(static_cast<int>(weights.size()), 1),
        weights_(std::move(weights)) {}

 protected:
  PerValidationUtility eval_impl(Coalition s) const override {
    double sum = 0.0;
    for (int i : s) {
      if (i < 0 || i >= player_count())
        throw std::runtime_error("ModularGame: coalition index out of range");
      sum += weights_(i);
    }
    Eigen::VectorXd v(1);
    v(0) = sum;
    return PerValidationUtility::from_values(std::move(v));
  }

 private:
  Eigen::VectorXd weights_;
};

class ModelGame final : public UtilityOracle {
 public:
  ModelGame(std::shared_ptr<const TaskSplit> split, const ModelSpec& spec)
      : UtilityOracle(split->n(), split->n_val()),
        split_(std::move(split)),
        spec_(spec) {}

 protected:
  PerValidationUtility eval_impl(Coalition s) const override {
    return evaluate_subset(*split_, spec_, s);
  }

 private:
  std::shared_ptr<const TaskSplit> split_;
  ModelSpec spec_;
};

class MemoizedOracle final : public UtilityOracle {
 public:
  MemoizedOracle(std::shared_ptr<const UtilityOracle> inner, std::size_t capacity)
      : UtilityOracle(inner->player_count(), inner->component_count()),
        inner_(std::move(inner)),
        capacity_(capacity) {}

  PerValidationUtility evaluate(Coalition s) const override {
    if (capacity_ == 0) {
      bump();
      return inner_->evaluate(s);
    }
    std::vector<int> key(s.begin(), s.end());
    std::sort(key.begin(), key.end());
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second.second);
        return it->second.first;
      }
    }
    bump();
    PerValidationUtility value = inner_->evaluate(key);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it == cache_.end()) {
        lru_.push_front(key);
        cache_.emplace(key, std::make_pair(value, lru_.begin()));
        if (cache_.size() > capacity_) {
          cache_.erase(lru_.back());
          lru_.pop_back();
        }
      }
    }
    return value;
  }

 protected:
  PerValidationUtility eval_impl(Coalition) const override {
    throw std::logic_error("MemoizedOracle: eval_impl unused");
  }

 private:
  struct VecHash {
    std::size_t operator()(const std::vector<int>& v) const {
      std::size_t h = 0xcbf29ce484222325ULL;
      for (int x : v) {
        h ^= static_cast<std::size_t>(x) + 0x9e3779b9ULL + (h << 6) + (h >> 2);
      }
      return h;
    }
  };

  std::shared_ptr<const UtilityOracle> inner_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  mutable std::list<std::vector<int>> lru_;
  mutable std::unordered_map<std::vector<int>,
                             std::pair<PerValidationUtility,
                                       std::list<std::vector<int>>::iterator>,
                             VecHash>
      cache_;
};

}  // namespace

std::shared_ptr<UtilityOracle> make_modular_game(const Eigen::VectorXd& weights) {
  return std::make_shared<ModularGame>(weights);
}

std::shared_ptr<UtilityOracle> make_model_game(
    std::shared_ptr<const TaskSplit> split, const ModelSpec& spec) {
  return std::make_shared<ModelGame>(std::move(split), spec);
}

std::shared_ptr<UtilityOracle> memoize(std::shared_ptr<const UtilityOracle> inner,
                                       std::size_t capacity) {
  return std::make_shared<MemoizedOracle>(std::move(inner), capacity);
}

}  // namespace valsel
