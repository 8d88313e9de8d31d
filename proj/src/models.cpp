#include "valsel/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace valsel {

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "logistic") return ModelKind::logistic;
  if (s == "ridge") return ModelKind::ridge;
  if (s == "knn") return ModelKind::knn;
  throw std::runtime_error("unknown model kind: " + s);
}

UtilityKind utility_kind_from_string(const std::string& s) {
  if (s == "correctness") return UtilityKind::correctness;
  if (s == "neg_loss") return UtilityKind::neg_loss;
  if (s == "neg_sq_error") return UtilityKind::neg_sq_error;
  throw std::runtime_error("unknown utility kind: " + s);
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kProbClamp = 1e-12;

}  // namespace

double LogisticModel::predict_prob(
    const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (constant) return constant_class == 1.0 ? 1.0 : 0.0;
  const double z = x.dot(weights.head(x.size())) + weights(weights.size() - 1);
  return sigmoid(z);
}

LogisticModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const ModelSpec& spec) {
  const int rows = static_cast<int>(X.rows());
  if (rows < 1) throw std::runtime_error("train_logistic: empty training set");
  if (spec.iterations < 1)
    throw std::runtime_error("train_logistic: iterations must be >= 1");

  LogisticModel model;
  const double y0 = y(0);
  if ((y.array() == y0).all()) {
    model.constant = true;
    model.constant_class = y0;
    model.weights = Eigen::VectorXd::Zero(X.cols() + 1);
    return model;
  }

  const int d = static_cast<int>(X.cols());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  Eigen::VectorXd z(rows), r(rows);
  for (int it = 0; it < spec.iterations; ++it) {
    z.noalias() = X * w;
    z.array() += b;
    r = z.unaryExpr([](double v) { return sigmoid(v); }) - y;
    Eigen::VectorXd grad = (X.transpose() * r) / rows;
    grad += spec.l2 * w;
    const double grad_b = r.sum() / rows;
    w -= spec.learning_rate * grad;
    b -= spec.learning_rate * grad_b;
  }
  model.weights.resize(d + 1);
  model.weights.head(d) = w;
  model.weights(d) = b;
  return model;
}

Eigen::VectorXd train_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            double lambda) {
  if (X.rows() < 1) throw std::runtime_error("train_ridge: empty training set");
  if (lambda < 0.0) throw std::runtime_error("train_ridge: lambda must be >= 0");
  const int d = static_cast<int>(X.cols());
  Eigen::MatrixXd Xi(X.rows(), d + 1);
  Xi.leftCols(d) = X;
  Xi.col(d).setOnes();
  Eigen::MatrixXd A = Xi.transpose() * Xi;
  A.diagonal().array() += lambda;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lambda == 0.0 && !lu.isInvertible())
    throw std::runtime_error(
        "train_ridge: singular normal equations at lambda=0; use lambda > 0");
  return lu.solve(Xi.transpose() * y);
}

double knn_predict(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Eigen::Ref<const Eigen::RowVectorXd>& query, int k) {
  const int rows = static_cast<int>(X.rows());
  if (rows < 1) throw std::runtime_error("knn_predict: empty training set");
  if (k < 1) throw std::runtime_error("knn_predict: K must be >= 1");

  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r)
    dist[static_cast<std::size_t>(r)] = {(X.row(r) - query).squaredNorm(), r};
  const int kk = std::min(k, rows);
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());

  // Majority vote; vote ties break to the lower class index.
  std::vector<std::pair<double, int>> votes;  // (class, count)
  for (int j = 0; j < kk; ++j) {
    const double label = y(dist[static_cast<std::size_t>(j)].second);
    bool found = false;
    for (auto& v : votes)
      if (v.first == label) {
        ++v.second;
        found = true;
      }
    if (!found) votes.emplace_back(label, 1);
  }
  double best_label = votes[0].first;
  int best_count = votes[0].second;
  for (const auto& v : votes) {
    if (v.second > best_count ||
        (v.second == best_count && v.first < best_label)) {
      best_label = v.first;
      best_count = v.second;
    }
  }
  return best_label;
}

PerValidationUtility evaluate_subset(const TaskSplit& split,
                                     const ModelSpec& spec,
                                     std::span<const int> coalition) {
  const int n = split.n();
  const int nv = split.n_val();
  for (int i : coalition)
    if (i < 0 || i >= n)
      throw std::runtime_error("evaluate_subset: invalid coalition index " +
                               std::to_string(i));

  Eigen::VectorXd values(nv);

  if (coalition.empty()) {
    switch (spec.utility) {
      case UtilityKind::correctness:
        values.setZero();
        break;
      case UtilityKind::neg_loss:
        // Uniform-probability baseline.
        values.setConstant(std::log(0.5));
        break;
      case UtilityKind::neg_sq_error:
        for (int v = 0; v < nv; ++v) {
          const double yv = split.dataset.labels(split.validation[static_cast<std::size_t>(v)]);
          values(v) = -yv * yv;
        }
        break;
    }
    return PerValidationUtility::from_values(std::move(values));
  }

  const int d = split.dataset.cols();
  Eigen::MatrixXd X(static_cast<int>(coalition.size()), d);
  Eigen::VectorXd y(static_cast<int>(coalition.size()));
  {
    // Deterministic set semantics: rows gathered in sorted index order.
    std::vector<int> sorted(coalition.begin(), coalition.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      const int row = split.feasible[static_cast<std::size_t>(sorted[j])];
      X.row(static_cast<int>(j)) = split.dataset.features.row(row);
      y(static_cast<int>(j)) = split.dataset.labels(row);
    }
  }

  switch (spec.kind) {
    case ModelKind::logistic: {
      const LogisticModel model = train_logistic(X, y, spec);
      for (int v = 0; v < nv; ++v) {
        const int row = split.validation[static_cast<std::size_t>(v)];
        const double yv = split.dataset.labels(row);
        const double p = model.predict_prob(split.dataset.features.row(row));
        if (spec.utility == UtilityKind::correctness) {
          const double pred = p >= 0.5 ? 1.0 : 0.0;
          values(v) = pred == yv ? 1.0 : 0.0;
        } else if (spec.utility == UtilityKind::neg_loss) {
          const double py = yv == 1.0 ? p : 1.0 - p;
          values(v) = std::log(std::max(py, kProbClamp));
        } else {
          throw std::runtime_error("evaluate_subset: logistic supports correctness/neg_loss");
        }
      }
      break;
    }
    case ModelKind::ridge: {
      const Eigen::VectorXd w = train_ridge(X, y, spec.ridge_lambda);
      for (int v = 0; v < nv; ++v) {
        const int row = split.validation[static_cast<std::size_t>(v)];
        const double yv = split.dataset.labels(row);
        const double pred =
            split.dataset.features.row(row).dot(w.head(d)) + w(d);
        if (spec.utility == UtilityKind::neg_sq_error) {
          values(v) = -(pred - yv) * (pred - yv);
        } else if (spec.utility == UtilityKind::correctness) {
          values(v) = ((pred >= 0.5 ? 1.0 : 0.0) == yv) ? 1.0 : 0.0;
        } else {
          throw std::runtime_error("evaluate_subset: ridge supports neg_sq_error/correctness");
        }
      }
      break;
    }
    case ModelKind::knn: {
      if (spec.utility != UtilityKind::correctness)
        throw std::runtime_error("evaluate_subset: knn supports correctness only");
      for (int v = 0; v < nv; ++v) {
        const int row = split.validation[static_cast<std::size_t>(v)];
        const double yv = split.dataset.labels(row);
        const double pred =
            knn_predict(X, y, split.dataset.features.row(row), spec.k);
        values(v) = pred == yv ? 1.0 : 0.0;
      }
      break;
    }
  }
  return PerValidationUtility::from_values(std::move(values));
}

}  // namespace valsel
