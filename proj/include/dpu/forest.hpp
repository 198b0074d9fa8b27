#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace dpu {

// CART node, stored pre-order within its tree. feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;   // index of left child in the tree's node vector
  int right = -1;  // index of right child
  double counts[2] = {0, 0};  // leaf class counts
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestParams {
  int n_trees = 1000;
  int max_features = 0;  // 0 -> ceil(sqrt(n_features))
  int min_leaf = 1;
  bool bootstrap = true;
};

struct Forest {
  std::vector<Tree> trees;
  int n_features = 0;
  Eigen::VectorXd importances;  // Gini importance, sums to 1 when any split exists
};

struct ChannelRanking {
  Eigen::VectorXd contributions;  // percentages, sum to 100
  std::vector<int> order;         // channel indices, descending contribution
};

// Recursive best-split CART on Gini impurity over max_features randomly
// chosen features per node. Thresholds are midpoints between consecutive
// distinct sorted values; ties break toward the lowest feature index, then
// the lowest threshold.
class Rng;
Tree fit_tree(const Eigen::MatrixXd& X, const std::vector<int>& y, const ForestParams& params,
              Rng& rng, Eigen::VectorXd* importance_accum = nullptr);

// Seeded bootstrap per tree; per-tree RNG streams derive from (seed, tree
// index), so parallel and serial fits agree bitwise.
Forest fit_forest(const Eigen::MatrixXd& X, const std::vector<int>& y,
                  const ForestParams& params, std::uint64_t seed);

struct Prediction {
  int label = 0;
  double prob[2] = {0, 0};  // averaged leaf class fractions
};

Prediction predict(const Forest& forest, const Eigen::VectorXd& x);

// Channel contribution = 100 * sum of the channel's five band importances.
ChannelRanking rank_channels(const Forest& forest);

// One node per line, pre-order.
std::string serialize_forest(const Forest& forest);
Forest deserialize_forest(const std::string& text);
void save_forest(const std::string& path, const Forest& forest);
Forest load_forest(const std::string& path);

}  // namespace dpu
