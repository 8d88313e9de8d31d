#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>

#include "valsel/dataset.hpp"

namespace valsel {

enum class ModelKind { logistic, ridge, knn };
enum class UtilityKind { correctness, neg_loss, neg_sq_error };

ModelKind model_kind_from_string(const std::string& s);
UtilityKind utility_kind_from_string(const std::string& s);

struct ModelSpec {
  ModelKind kind = ModelKind::logistic;
  double learning_rate = 0.1;
  int iterations = 500;
  double l2 = 1e-4;
  double ridge_lambda = 1e-2;
  int k = 5;
  UtilityKind utility = UtilityKind::correctness;
};

// Per-validation utility vector (u_v(S))_{v in V} plus its mean u_V(S).
struct PerValidationUtility {
  Eigen::VectorXd values;
  double aggregate = 0.0;

  static PerValidationUtility from_values(Eigen::VectorXd v) {
    PerValidationUtility u;
    u.aggregate = v.size() > 0 ? v.mean() : 0.0;
    u.values = std::move(v);
    return u;
  }
};

struct LogisticModel {
  Eigen::VectorXd weights;  // feature weights, intercept last
  bool constant = false;    // single-class fallback
  double constant_class = 0.0;

  double predict_prob(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

// Full-batch gradient descent from zero initialization, fixed iteration
// count; bit-identical output for identical inputs. L2 excludes the
// intercept. A single-class training set yields a constant predictor.
LogisticModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const ModelSpec& spec);

// Closed-form solve of (X'X + lambda I) w = X'y with an intercept column
// appended; weights returned with the intercept last.
Eigen::VectorXd train_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            double lambda);

// Euclidean majority vote over min(K, rows) nearest; distance ties break to
// the lower row index, vote ties to the lower class index.
double knn_predict(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const Eigen::Ref<const Eigen::RowVectorXd>& query, int k);

// Trains spec.kind on the coalition's rows and scores every validation
// datum. u_v(empty) = 0 for correctness; loss utilities use the baseline
// predictor (uniform probability / zero prediction) for the empty coalition.
PerValidationUtility evaluate_subset(const TaskSplit& split,
                                     const ModelSpec& spec,
                                     std::span<const int> coalition);

}  // namespace valsel
