#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "valsel/dataset.hpp"

using namespace valsel;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path = (std::filesystem::temp_directory_path() /
            ("valsel_ds_" + std::to_string(counter++) + ".csv"))
               .string();
    std::ofstream(path) << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

Dataset toy(int rows) {
  Dataset ds;
  ds.features = Eigen::MatrixXd::Zero(rows, 2);
  ds.labels = Eigen::VectorXd::Zero(rows);
  for (int r = 0; r < rows; ++r) {
    ds.features(r, 0) = r;
    ds.features(r, 1) = -r;
    ds.labels(r) = r % 2;
    ds.row_ids.push_back(r);
  }
  return ds;
}

}  // namespace

TEST_CASE("load_csv standardizes per column") {
  TempFile f("a,b,label\n1,10,0\n2,20,1\n3,30,0\n");
  const Dataset ds = load_csv(f.path, {"label"});
  REQUIRE(ds.rows() == 3);
  REQUIRE(ds.cols() == 2);
  for (int c = 0; c < 2; ++c) {
    CHECK(std::abs(ds.features.col(c).mean()) < 1e-9);
    CHECK(std::abs(ds.features.col(c).squaredNorm() / 3 - 1.0) < 1e-9);
  }
  CHECK(ds.labels(1) == 1.0);
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_csv rejects NaN unless imputing") {
  TempFile f("a,label\n1,0\nnan,1\n3,0\n");
  CHECK_THROWS(load_csv(f.path, {"label"}));
  const Dataset ds = load_csv(f.path, {"label", true});
  CHECK(ds.rows() == 3);
}

TEST_CASE("load_csv error cases") {
  CHECK_THROWS(load_csv("/nonexistent/file.csv", {"label"}));
  TempFile empty("");
  CHECK_THROWS(load_csv(empty.path, {"label"}));
  TempFile nolabel("a,b\n1,2\n");
  CHECK_THROWS(load_csv(nolabel.path, {"label"}));
  TempFile bad("a,label\nfoo,1\n");
  CHECK_THROWS(load_csv(bad.path, {"label"}));
}

TEST_CASE("binarize_labels indicator semantics") {
  Dataset ds = toy(4);
  ds.labels << 0, 1, 2, 1;
  const Dataset out = binarize_labels(ds, 1);
  CHECK(out.labels(0) == 0);
  CHECK(out.labels(1) == 1);
  CHECK(out.labels(2) == 0);
  CHECK(out.labels(3) == 1);
  CHECK_FALSE(out.degenerate_labels);

  // Idempotent on {0,1} labels.
  const Dataset again = binarize_labels(out, 1);
  CHECK(again.labels == out.labels);

  Dataset all2 = toy(3);
  all2.labels.setConstant(2);
  const Dataset deg = binarize_labels(all2, 1);
  CHECK(deg.labels.sum() == 0.0);
  CHECK(deg.degenerate_labels);
}

TEST_CASE("split determinism and partition") {
  const Dataset ds = toy(10);
  const TaskSplit a = make_split(ds, 4, 3, 7);
  const TaskSplit b = make_split(ds, 4, 3, 7);
  CHECK(a.feasible == b.feasible);
  CHECK(a.validation == b.validation);
  for (int i : a.feasible)
    for (int v : a.validation) CHECK(i != v);

  const TaskSplit full = make_split(ds, 6, 4, 3);
  std::vector<int> all = full.feasible;
  all.insert(all.end(), full.validation.begin(), full.validation.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 10; ++i) CHECK(all[std::size_t(i)] == i);

  CHECK_THROWS(make_split(ds, 8, 3, 1));
}

TEST_CASE("inject_label_noise counts, records, and restores") {
  const Dataset ds = toy(14);
  const TaskSplit split = make_split(ds, 10, 4, 2);

  const TaskSplit same = inject_label_noise(split, 0.0, 9);
  CHECK(same.dataset.labels == split.dataset.labels);
  CHECK(same.flipped.empty());

  const TaskSplit noisy = inject_label_noise(split, 0.3, 9);
  REQUIRE(noisy.flipped.size() == 3);
  int changed = 0;
  for (int pos = 0; pos < split.n(); ++pos) {
    const int row = split.feasible[std::size_t(pos)];
    if (noisy.dataset.labels(row) != split.dataset.labels(row)) ++changed;
  }
  CHECK(changed == 3);
  // Validation labels untouched.
  for (int row : split.validation)
    CHECK(noisy.dataset.labels(row) == split.dataset.labels(row));

  // Re-flipping the recorded set restores the labels exactly.
  TaskSplit restored = noisy;
  for (int pos : noisy.flipped) {
    const int row = restored.feasible[std::size_t(pos)];
    restored.dataset.labels(row) = 1.0 - restored.dataset.labels(row);
  }
  CHECK(restored.dataset.labels == split.dataset.labels);

  Dataset nonbin = toy(6);
  nonbin.labels << 0, 1, 2, 0, 1, 2;
  CHECK_THROWS(inject_label_noise(make_split(nonbin, 4, 2, 1), 0.5, 1));
}

TEST_CASE("split metadata json round trip fields") {
  const Dataset ds = toy(12);
  TaskSplit split = make_split(ds, 6, 4, 5);
  split = inject_label_noise(split, 0.5, 8);
  const nlohmann::json j = split_metadata_json(split);
  CHECK(j["feasible"].get<std::vector<int>>() == split.feasible);
  CHECK(j["validation"].get<std::vector<int>>() == split.validation);
  CHECK(j["flipped"].get<std::vector<int>>() == split.flipped);
  CHECK(j["seed"].get<std::uint64_t>() == 5);
  CHECK(j["noise_seed"].get<std::uint64_t>() == 8);
}
