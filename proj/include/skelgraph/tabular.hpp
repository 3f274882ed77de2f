#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace skelgraph {

// Binary decision tree stored as a flat node array; leaves hold the
// positive-class fraction of their training samples.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1, right = -1;  // both -1 on leaves
  double leaf_value = 0.0;
  bool is_leaf() const { return left < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct Forest {
  std::vector<DecisionTree> trees;
  int num_trees = 50;
  int max_depth = 6;
  int num_features = 0;  // training feature width, enforced at prediction
  std::uint64_t seed = 0;
};

// Each tree is fit on a seeded bootstrap sample (falling back to the full
// sample if the bootstrap is single-class), splitting greedily by Gini
// impurity over sqrt(d) randomly sampled features per node, with midpoint
// thresholds. Throws on fewer than two samples or single-class input.
Forest fit_forest(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                  int num_trees = 50, int max_depth = 6, std::uint64_t seed = 0);

// Mean of per-tree leaf fractions, one probability per row.
Eigen::VectorXd predict_forest(const Forest& forest, const Eigen::MatrixXd& features);

void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace skelgraph
