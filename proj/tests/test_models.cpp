#include <doctest.h>

#include <cmath>
#include <vector>

#include "valsel/models.hpp"
#include "valsel/synthetic.hpp"

using namespace valsel;

namespace {

double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const LogisticModel& m) {
  double loss = 0.0;
  for (int r = 0; r < X.rows(); ++r) {
    const double p = m.predict_prob(X.row(r));
    const double py = y(r) == 1.0 ? p : 1.0 - p;
    loss -= std::log(std::max(py, 1e-12));
  }
  return loss / X.rows();
}

TaskSplit cluster_split(int rows, int n_feasible, int n_val,
                        std::uint64_t seed) {
  const RawTable raw = make_two_clusters(rows, 4, 4.0, seed);
  Dataset ds;
  ds.features = raw.features;
  ds.labels = raw.labels;
  for (int r = 0; r < rows; ++r) ds.row_ids.push_back(r);
  for (int c = 0; c < ds.cols(); ++c) {
    ds.features.col(c).array() -= ds.features.col(c).mean();
    const double sd = std::sqrt(ds.features.col(c).squaredNorm() / rows);
    if (sd > 0) ds.features.col(c) /= sd;
  }
  return make_split(ds, n_feasible, n_val, seed);
}

}  // namespace

TEST_CASE("logistic separates two points and loss decreases with training") {
  Eigen::MatrixXd X(2, 1);
  X << -1.0, 1.0;
  Eigen::VectorXd y(2);
  y << 0.0, 1.0;
  ModelSpec spec;
  const LogisticModel m = train_logistic(X, y, spec);
  CHECK(m.predict_prob(X.row(0)) < 0.5);
  CHECK(m.predict_prob(X.row(1)) >= 0.5);

  double prev = logistic_loss(X, y, train_logistic(X, y, [] {
                                ModelSpec s;
                                s.iterations = 1;
                                return s;
                              }()));
  for (int iters : {5, 25, 100, 500}) {
    ModelSpec s;
    s.iterations = iters;
    const double cur = logistic_loss(X, y, train_logistic(X, y, s));
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("logistic single-class fallback is a constant predictor") {
  Eigen::MatrixXd X(3, 2);
  X.setRandom();
  Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  const LogisticModel m = train_logistic(X, y, ModelSpec{});
  CHECK(m.constant);
  CHECK(m.predict_prob(X.row(0)) == 1.0);
  CHECK(m.predict_prob(Eigen::RowVector2d(5.0, -3.0)) == 1.0);
}

TEST_CASE("logistic is invariant under uniform row duplication") {
  Eigen::MatrixXd X(3, 2);
  X << 0.5, -1.0, 1.5, 0.3, -0.7, 0.9;
  Eigen::VectorXd y(3);
  y << 0, 1, 1;
  Eigen::MatrixXd X2(6, 2);
  X2 << X, X;
  Eigen::VectorXd y2(6);
  y2 << y, y;
  const LogisticModel a = train_logistic(X, y, ModelSpec{});
  const LogisticModel b = train_logistic(X2, y2, ModelSpec{});
  CHECK((a.weights - b.weights).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("logistic training is bit-deterministic") {
  Eigen::MatrixXd X(4, 3);
  X << 1, 2, 3, -1, 0.5, 2, 0, -2, 1, 3, 1, -1;
  Eigen::VectorXd y(4);
  y << 0, 1, 0, 1;
  const LogisticModel a = train_logistic(X, y, ModelSpec{});
  const LogisticModel b = train_logistic(X, y, ModelSpec{});
  CHECK(a.weights == b.weights);
}

TEST_CASE("ridge exact interpolation and shrinkage limit") {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 2, 4, 6;
  const Eigen::VectorXd w = train_ridge(X, y, 0.0);
  CHECK(std::abs(w(0) - 2.0) < 1e-9);
  CHECK(std::abs(w(1)) < 1e-9);

  const Eigen::VectorXd shrunk = train_ridge(X, y, 1e9);
  CHECK(shrunk.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("ridge matches an independent normal-equation solve") {
  Eigen::MatrixXd X(3, 2);
  X << 1.0, 0.5, -2.0, 1.5, 0.7, -0.3;
  Eigen::VectorXd y(3);
  y << 1.2, -0.5, 0.9;
  const double lambda = 0.37;
  const Eigen::VectorXd w = train_ridge(X, y, lambda);

  Eigen::MatrixXd Xi(3, 3);
  Xi.leftCols(2) = X;
  Xi.col(2).setOnes();
  Eigen::MatrixXd A = Xi.transpose() * Xi;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd expected = A.colPivHouseholderQr().solve(Xi.transpose() * y);
  CHECK((w - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("ridge singular system at lambda=0 errors") {
  Eigen::MatrixXd X(2, 3);  // underdetermined
  X.setRandom();
  Eigen::VectorXd y(2);
  y.setRandom();
  CHECK_THROWS(train_ridge(X, y, 0.0));
}

TEST_CASE("knn_predict tie rules and majority vote") {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 1.0, 2.0;
  Eigen::VectorXd y(3);
  y << 1, 1, 0;

  // K=1, query on a training point.
  CHECK(knn_predict(X, y, Eigen::RowVectorXd::Constant(1, 2.0), 1) == 0.0);
  // K=3 majority.
  CHECK(knn_predict(X, y, Eigen::RowVectorXd::Constant(1, 1.0), 3) == 1.0);
  // Vote tie at K=2 -> lower class index.
  Eigen::VectorXd y2(3);
  y2 << 1, 0, 0;
  CHECK(knn_predict(X, y2, Eigen::RowVectorXd::Constant(1, 0.5), 2) == 0.0);
  // Distance tie -> lower row index.
  Eigen::MatrixXd Xt(2, 1);
  Xt << -1.0, 1.0;
  Eigen::VectorXd yt(2);
  yt << 1, 0;
  CHECK(knn_predict(Xt, yt, Eigen::RowVectorXd::Constant(1, 0.0), 1) == 1.0);
}

TEST_CASE("evaluate_subset empty-coalition conventions") {
  const TaskSplit split = cluster_split(60, 20, 10, 3);
  ModelSpec spec;
  const PerValidationUtility c = evaluate_subset(split, spec, std::vector<int>{});
  CHECK(c.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.aggregate == 0.0);

  spec.utility = UtilityKind::neg_loss;
  const PerValidationUtility l = evaluate_subset(split, spec, std::vector<int>{});
  CHECK(l.values.minCoeff() == doctest::Approx(std::log(0.5)));

  ModelSpec ridge;
  ridge.kind = ModelKind::ridge;
  ridge.utility = UtilityKind::neg_sq_error;
  const PerValidationUtility r = evaluate_subset(split, ridge, std::vector<int>{});
  for (int v = 0; v < split.n_val(); ++v) {
    const double yv = split.dataset.labels(split.validation[std::size_t(v)]);
    CHECK(r.values(v) == -yv * yv);
  }
}

TEST_CASE("evaluate_subset full coalition on separable task is accurate") {
  const TaskSplit split = cluster_split(120, 40, 40, 5);
  std::vector<int> all;
  for (int i = 0; i < split.n(); ++i) all.push_back(i);
  const PerValidationUtility u = evaluate_subset(split, ModelSpec{}, all);
  CHECK(u.aggregate >= 0.95);
  CHECK(u.aggregate <= 1.0);
  for (int v = 0; v < u.values.size(); ++v)
    CHECK((u.values(v) == 0.0 || u.values(v) == 1.0));
}

TEST_CASE("evaluate_subset has set semantics and is pure") {
  const TaskSplit split = cluster_split(60, 15, 10, 7);
  const std::vector<int> a{2, 5, 9, 11};
  const std::vector<int> b{11, 2, 9, 5};
  for (ModelKind kind : {ModelKind::logistic, ModelKind::knn}) {
    ModelSpec spec;
    spec.kind = kind;
    const PerValidationUtility ua = evaluate_subset(split, spec, a);
    const PerValidationUtility ub = evaluate_subset(split, spec, b);
    const PerValidationUtility uc = evaluate_subset(split, spec, a);
    CHECK(ua.values == ub.values);
    CHECK(ua.values == uc.values);
  }
  CHECK_THROWS(evaluate_subset(split, ModelSpec{}, std::vector<int>{99}));
}

TEST_CASE("aggregate equals mean of values") {
  const TaskSplit split = cluster_split(60, 15, 10, 7);
  const PerValidationUtility u =
      evaluate_subset(split, ModelSpec{}, std::vector<int>{1, 3, 4});
  CHECK(std::abs(u.aggregate - u.values.mean()) < 1e-12);
}
