#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "skelgraph/rng.hpp"
#include "skelgraph/tabular.hpp"

using namespace skelgraph;

TEST_CASE("a single stump separates one feature at the midpoint") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  Eigen::VectorXi y(4);
  y << 0, 0, 1, 1;

  const Forest f = fit_forest(x, y, 1, 1, 3);
  REQUIRE(f.trees.size() == 1);
  const DecisionTree& tree = f.trees[0];
  REQUIRE(!tree.nodes.empty());

  // With any bootstrap containing both classes the best Gini split is the
  // clean one, and midpoint placement puts it between the class extremes.
  const TreeNode& root = tree.nodes[0];
  REQUIRE(!root.is_leaf());
  CHECK(root.feature == 0);
  CHECK(root.threshold > 0.0);
  CHECK(root.threshold < 3.0);

  const Eigen::VectorXd p = predict_forest(f, x);
  CHECK(p[0] <= 0.5);
  CHECK(p[3] > 0.5);
}

TEST_CASE("midpoint threshold is exact on the canonical stump") {
  // Seed chosen so the size-4 bootstrap of tree 0 contains 1 and 2 with both
  // classes; the clean split then lands exactly at (1 + 2) / 2.
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  Eigen::VectorXi y(4);
  y << 0, 0, 1, 1;

  bool found = false;
  for (std::uint64_t seed = 0; seed < 32 && !found; ++seed) {
    const Forest f = fit_forest(x, y, 1, 1, seed);
    const TreeNode& root = f.trees[0].nodes[0];
    if (root.is_leaf() || root.threshold != 1.5) continue;
    found = true;
    // Training accuracy 1 on the full set.
    const Eigen::VectorXd p = predict_forest(f, x);
    int correct = 0;
    for (int i = 0; i < 4; ++i) correct += (p[i] > 0.5 ? 1 : 0) == y[i];
    CHECK(correct == 4);
  }
  CHECK(found);
}

TEST_CASE("forest separates a clean two-cluster problem") {
  Rng rng(17);
  const int n = 80;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    const bool pos = i % 2 == 0;
    for (int j = 0; j < 3; ++j)
      x(i, j) = (pos ? 2.0 : -2.0) + rng.uniform01() - 0.5;
    y[i] = pos ? 1 : 0;
  }
  const Forest f = fit_forest(x, y, 20, 4, 5);
  const Eigen::VectorXd p = predict_forest(f, x);
  int correct = 0;
  for (int i = 0; i < n; ++i) correct += (p[i] > 0.5 ? 1 : 0) == y[i];
  CHECK(correct == n);
  CHECK(p.minCoeff() >= 0.0);
  CHECK(p.maxCoeff() <= 1.0);
}

TEST_CASE("input validation") {
  Eigen::MatrixXd x(4, 2);
  x.setZero();
  Eigen::VectorXi y(4);
  SUBCASE("single-class labels throw") {
    y << 1, 1, 1, 1;
    CHECK_THROWS(fit_forest(x, y, 2, 2, 0));
  }
  SUBCASE("label values outside 0/1 throw") {
    y << 0, 1, 2, 1;
    CHECK_THROWS(fit_forest(x, y, 2, 2, 0));
  }
  SUBCASE("row count mismatch throws") {
    Eigen::VectorXi short_y(3);
    short_y << 0, 1, 0;
    CHECK_THROWS(fit_forest(x, short_y, 2, 2, 0));
  }
  SUBCASE("fewer than two samples throw") {
    Eigen::MatrixXd x1(1, 2);
    Eigen::VectorXi y1(1);
    y1 << 1;
    CHECK_THROWS(fit_forest(x1, y1, 2, 2, 0));
  }
  SUBCASE("prediction feature width must match") {
    y << 0, 1, 0, 1;
    const Forest f = fit_forest(x, y, 2, 2, 0);
    Eigen::MatrixXd wide(1, 5);
    wide.setZero();
    CHECK_THROWS(predict_forest(f, wide));
  }
}

TEST_CASE("training is deterministic in the seed") {
  Rng rng(9);
  Eigen::MatrixXd x(40, 4);
  Eigen::VectorXi y(40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = rng.uniform01();
    y[i] = x(i, 1) > 0.5 ? 1 : 0;
  }
  const Forest a = fit_forest(x, y, 10, 5, 42);
  const Forest b = fit_forest(x, y, 10, 5, 42);
  REQUIRE(a.trees.size() == b.trees.size());
  const Eigen::VectorXd pa = predict_forest(a, x);
  const Eigen::VectorXd pb = predict_forest(b, x);
  CHECK((pa - pb).cwiseAbs().maxCoeff() == 0.0);

  const Forest c = fit_forest(x, y, 10, 5, 43);
  const Eigen::VectorXd pc = predict_forest(c, x);
  CHECK((pa - pc).cwiseAbs().maxCoeff() > 0.0);  // different bootstraps
}

TEST_CASE("forest json round trip") {
  namespace fs = std::filesystem;
  Eigen::MatrixXd x(20, 2);
  Eigen::VectorXi y(20);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = rng.uniform01();
    x(i, 1) = rng.uniform01();
    y[i] = x(i, 0) + x(i, 1) > 1.0 ? 1 : 0;
  }
  const Forest f = fit_forest(x, y, 5, 4, 11);

  const fs::path dir = fs::temp_directory_path() / "skelgraph_tabular";
  fs::create_directories(dir);
  const std::string path = (dir / "forest.json").string();
  save_forest(f, path);
  const Forest back = load_forest(path);

  CHECK(back.num_trees == f.num_trees);
  CHECK(back.max_depth == f.max_depth);
  CHECK(back.seed == f.seed);
  REQUIRE(back.trees.size() == f.trees.size());
  const Eigen::VectorXd pf = predict_forest(f, x);
  const Eigen::VectorXd pb = predict_forest(back, x);
  CHECK((pf - pb).cwiseAbs().maxCoeff() == 0.0);
  fs::remove_all(dir);
}
