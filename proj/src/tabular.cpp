#include "skelgraph/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "skelgraph/rng.hpp"

namespace skelgraph {

using nlohmann::json;

namespace {

double gini(long pos, long total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(total);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXi& y;
  int max_depth;
  int features_per_node;
  Rng& rng;
  std::vector<TreeNode> nodes;

  int build(const std::vector<int>& samples, int depth) {
    long pos = 0;
    for (const int s : samples) pos += y[s];
    const long total = static_cast<long>(samples.size());

    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<size_t>(id)].leaf_value =
        static_cast<double>(pos) / static_cast<double>(total);
    if (depth >= max_depth || pos == 0 || pos == total || total < 2) return id;

    // sqrt(d) candidate features, sampled without replacement.
    std::vector<int> candidates(static_cast<size_t>(x.cols()));
    std::iota(candidates.begin(), candidates.end(), 0);
    rng.shuffle(candidates);
    candidates.resize(static_cast<size_t>(features_per_node));

    double best_impurity = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> order;  // (value, label)
    for (const int f : candidates) {
      order.clear();
      for (const int s : samples) order.emplace_back(x(s, f), y[s]);
      std::sort(order.begin(), order.end());
      long left_pos = 0, left_total = 0;
      for (size_t i = 0; i + 1 < order.size(); ++i) {
        left_pos += order[i].second;
        ++left_total;
        if (order[i].first == order[i + 1].first) continue;  // not a boundary
        const double threshold = 0.5 * (order[i].first + order[i + 1].first);
        const double impurity =
            (static_cast<double>(left_total) * gini(left_pos, left_total) +
             static_cast<double>(total - left_total) * gini(pos - left_pos, total - left_total)) /
            static_cast<double>(total);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = f;
          best_threshold = threshold;
        }
      }
    }
    if (best_feature < 0) return id;  // constant on every candidate feature

    std::vector<int> left, right;
    for (const int s : samples)
      (x(s, best_feature) <= best_threshold ? left : right).push_back(s);
    nodes[static_cast<size_t>(id)].feature = best_feature;
    nodes[static_cast<size_t>(id)].threshold = best_threshold;
    const int left_id = build(left, depth + 1);
    nodes[static_cast<size_t>(id)].left = left_id;
    const int right_id = build(right, depth + 1);
    nodes[static_cast<size_t>(id)].right = right_id;
    return id;
  }
};

}  // namespace

Forest fit_forest(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels, int num_trees,
                  int max_depth, std::uint64_t seed) {
  const int n = static_cast<int>(features.rows());
  if (n != labels.size()) throw std::invalid_argument("feature/label row counts differ");
  if (n < 2) throw std::invalid_argument("need at least two samples");
  if (num_trees < 1 || max_depth < 1) throw std::invalid_argument("forest sizes must be positive");
  long pos = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
    pos += labels[i];
  }
  if (pos == 0 || pos == n) throw std::invalid_argument("training labels are single-class");

  Forest forest;
  forest.num_trees = num_trees;
  forest.max_depth = max_depth;
  forest.num_features = static_cast<int>(features.cols());
  forest.seed = seed;
  const int d = static_cast<int>(features.cols());
  const int per_node = std::max(1, static_cast<int>(std::llround(std::sqrt(static_cast<double>(d)))));

  Rng master(seed);
  for (int t = 0; t < num_trees; ++t) {
    Rng tree_rng = master.fork(static_cast<std::uint64_t>(t));
    std::vector<int> samples(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) samples[static_cast<size_t>(i)] = tree_rng.uniform_int(0, n - 1);
    long boot_pos = 0;
    for (const int s : samples) boot_pos += labels[s];
    if (boot_pos == 0 || boot_pos == n)  // degenerate bootstrap: fall back to the full sample
      std::iota(samples.begin(), samples.end(), 0);

    TreeBuilder builder{features, labels, max_depth, per_node, tree_rng, {}};
    builder.build(samples, 0);
    forest.trees.push_back({std::move(builder.nodes)});
  }
  return forest;
}

Eigen::VectorXd predict_forest(const Forest& forest, const Eigen::MatrixXd& features) {
  if (forest.trees.empty()) throw std::invalid_argument("empty forest");
  if (forest.num_features > 0 && features.cols() != forest.num_features)
    throw std::invalid_argument("feature width " + std::to_string(features.cols()) +
                                " does not match the trained width " +
                                std::to_string(forest.num_features));
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    double total = 0.0;
    for (const DecisionTree& tree : forest.trees) {
      int at = 0;
      while (!tree.nodes[static_cast<size_t>(at)].is_leaf()) {
        const TreeNode& node = tree.nodes[static_cast<size_t>(at)];
        at = features(i, node.feature) <= node.threshold ? node.left : node.right;
      }
      total += tree.nodes[static_cast<size_t>(at)].leaf_value;
    }
    probs[i] = total / static_cast<double>(forest.trees.size());
  }
  return probs;
}

void save_forest(const Forest& forest, const std::string& path) {
  json trees = json::array();
  for (const DecisionTree& tree : forest.trees) {
    json nodes = json::array();
    for (const TreeNode& node : tree.nodes)
      nodes.push_back({{"feature", node.feature},
                       {"threshold", node.threshold},
                       {"left", node.left},
                       {"right", node.right},
                       {"leaf_value", node.leaf_value}});
    trees.push_back(std::move(nodes));
  }
  json j = {{"num_trees", forest.num_trees},
            {"max_depth", forest.max_depth},
            {"num_features", forest.num_features},
            {"seed", forest.seed},
            {"trees", std::move(trees)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << "\n";
}

Forest load_forest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("malformed JSON in " + path);

  Forest forest;
  forest.num_trees = j.at("num_trees").get<int>();
  forest.max_depth = j.at("max_depth").get<int>();
  forest.num_features = j.value("num_features", 0);
  forest.seed = j.at("seed").get<std::uint64_t>();
  for (const json& tree : j.at("trees")) {
    DecisionTree t;
    for (const json& entry : tree) {
      TreeNode node;
      node.feature = entry.at("feature").get<int>();
      node.threshold = entry.at("threshold").get<double>();
      node.left = entry.at("left").get<int>();
      node.right = entry.at("right").get<int>();
      node.leaf_value = entry.at("leaf_value").get<double>();
      if (!node.is_leaf() &&
          (node.left >= static_cast<int>(tree.size()) || node.right < 0 ||
           node.right >= static_cast<int>(tree.size())))
        throw std::runtime_error("forest node children out of range in " + path);
      if (node.leaf_value < 0.0 || node.leaf_value > 1.0)
        throw std::runtime_error("forest leaf fraction outside [0,1] in " + path);
      t.nodes.push_back(node);
    }
    if (t.nodes.empty()) throw std::runtime_error("empty tree in " + path);
    forest.trees.push_back(std::move(t));
  }
  if (forest.trees.empty()) throw std::runtime_error("empty forest in " + path);
  return forest;
}

}  // namespace skelgraph
