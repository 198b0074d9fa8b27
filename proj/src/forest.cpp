#include "dpu/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dpu/rng.hpp"

namespace dpu {

namespace {

double gini(double c0, double c1) {
  const double n = c0 + c1;
  if (n <= 0) return 0.0;
  const double p0 = c0 / n, p1 = c1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct Builder {
  const Eigen::MatrixXd& X;
  const std::vector<int>& y;
  const ForestParams& params;
  Rng& rng;
  Eigen::VectorXd* importance;
  double n_root;
  std::vector<TreeNode> nodes;

  // partial Fisher-Yates draw of k distinct feature indices, returned sorted
  std::vector<int> sample_features(int d, int k) {
    std::vector<int> pool(d);
    for (int i = 0; i < d; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i)
      std::swap(pool[i], pool[i + static_cast<int>(rng.below(d - i))]);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  int build(std::vector<int>& idx) {
    double c0 = 0, c1 = 0;
    for (int i : idx) (y[i] == 0 ? c0 : c1) += 1;
    const double n = c0 + c1;
    const double g_parent = gini(c0, c1);

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();

    const bool pure = (c0 == 0 || c1 == 0);
    if (pure || n < 2.0 * params.min_leaf) {
      nodes[node_id].counts[0] = c0;
      nodes[node_id].counts[1] = c1;
      return node_id;
    }

    const int d = static_cast<int>(X.cols());
    const int k = std::min(params.max_features, d);
    const std::vector<int> feats = sample_features(d, k);

    int best_feature = -1;
    double best_threshold = 0, best_gain = 0;
    std::vector<std::pair<double, int>> vals;
    vals.reserve(idx.size());
    for (int f : feats) {
      vals.clear();
      for (int i : idx) vals.emplace_back(X(i, f), y[i]);
      std::sort(vals.begin(), vals.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double l0 = 0, l1 = 0;
      for (std::size_t s = 0; s + 1 < vals.size(); ++s) {
        (vals[s].second == 0 ? l0 : l1) += 1;
        if (vals[s].first == vals[s + 1].first) continue;
        const double nl = l0 + l1, nr = n - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        const double gain =
            g_parent - (nl * gini(l0, l1) + nr * gini(c0 - l0, c1 - l1)) / n;
        if (gain > best_gain) {  // strict: equal gain keeps the earlier candidate
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (vals[s].first + vals[s + 1].first);
        }
      }
    }

    if (best_feature < 0 || best_gain <= 0) {
      nodes[node_id].counts[0] = c0;
      nodes[node_id].counts[1] = c1;
      return node_id;
    }

    if (importance) (*importance)(best_feature) += (n / n_root) * best_gain;

    std::vector<int> left_idx, right_idx;
    for (int i : idx) (X(i, best_feature) <= best_threshold ? left_idx : right_idx).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    nodes[node_id].left = build(left_idx);
    nodes[node_id].right = build(right_idx);
    return node_id;
  }
};

}  // namespace

Tree fit_tree(const Eigen::MatrixXd& X, const std::vector<int>& y, const ForestParams& params,
              Rng& rng, Eigen::VectorXd* importance_accum) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw std::invalid_argument("fit_tree: feature matrix / label length mismatch");
  if (X.rows() == 0) throw std::invalid_argument("fit_tree: no samples");
  for (int label : y)
    if (label != 0 && label != 1) throw std::invalid_argument("fit_tree: labels must be 0/1");

  ForestParams p = params;
  if (p.max_features <= 0)
    p.max_features = static_cast<int>(std::ceil(std::sqrt(double(X.cols()))));

  std::vector<int> idx(X.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);

  Builder b{X, y, p, rng, importance_accum, double(X.rows()), {}};
  b.build(idx);
  return Tree{std::move(b.nodes)};
}

Forest fit_forest(const Eigen::MatrixXd& X, const std::vector<int>& y,
                  const ForestParams& params, std::uint64_t seed) {
  if (params.n_trees <= 0) throw std::invalid_argument("fit_forest: n_trees must be positive");
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw std::invalid_argument("fit_forest: feature matrix / label length mismatch");

  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());

  Forest forest;
  forest.n_features = d;
  forest.trees.resize(params.n_trees);
  std::vector<Eigen::VectorXd> tree_importances(params.n_trees);

  auto fit_one = [&](int t) {
    Rng rng(derive_seed(seed, "tree" + std::to_string(t)));
    Eigen::MatrixXd Xb;
    std::vector<int> yb;
    const Eigen::MatrixXd* Xp = &X;
    const std::vector<int>* yp = &y;
    if (params.bootstrap) {
      Xb.resize(n, d);
      yb.resize(n);
      for (int i = 0; i < n; ++i) {
        const int j = static_cast<int>(rng.below(n));
        Xb.row(i) = X.row(j);
        yb[i] = y[j];
      }
      Xp = &Xb;
      yp = &yb;
    }
    tree_importances[t] = Eigen::VectorXd::Zero(d);
    forest.trees[t] = fit_tree(*Xp, *yp, params, rng, &tree_importances[t]);
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw <= 1 || params.n_trees < 8) {
    for (int t = 0; t < params.n_trees; ++t) fit_one(t);
  } else {
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < hw; ++w)
      workers.emplace_back([&, w] {
        for (int t = static_cast<int>(w); t < params.n_trees; t += static_cast<int>(hw))
          fit_one(t);
      });
    for (auto& th : workers) th.join();
  }

  // deterministic reduction in tree order
  forest.importances = Eigen::VectorXd::Zero(d);
  for (const auto& imp : tree_importances) forest.importances += imp;
  const double total = forest.importances.sum();
  if (total > 0) forest.importances /= total;
  return forest;
}

Prediction predict(const Forest& forest, const Eigen::VectorXd& x) {
  if (x.size() != forest.n_features)
    throw std::invalid_argument("predict: feature dimension mismatch");
  if (forest.trees.empty()) throw std::invalid_argument("predict: empty forest");

  double p1 = 0;
  for (const auto& tree : forest.trees) {
    int i = 0;
    while (tree.nodes[i].feature >= 0)
      i = x(tree.nodes[i].feature) <= tree.nodes[i].threshold ? tree.nodes[i].left
                                                              : tree.nodes[i].right;
    const double c0 = tree.nodes[i].counts[0], c1 = tree.nodes[i].counts[1];
    p1 += c1 / (c0 + c1);
  }
  p1 /= static_cast<double>(forest.trees.size());

  Prediction out;
  out.prob[0] = 1.0 - p1;
  out.prob[1] = p1;
  out.label = p1 > 0.5 ? 1 : 0;  // exact tie -> non-seizure
  return out;
}

ChannelRanking rank_channels(const Forest& forest) {
  if (forest.n_features != 115)
    throw std::invalid_argument("rank_channels: forest must cover 115 attributes (23ch x 5 bands)");
  if (forest.importances.sum() <= 0)
    throw std::invalid_argument("rank_channels: forest recorded no splits");

  ChannelRanking r;
  r.contributions.resize(23);
  for (int c = 0; c < 23; ++c)
    r.contributions(c) = 100.0 * forest.importances.segment(5 * c, 5).sum();
  r.order.resize(23);
  for (int c = 0; c < 23; ++c) r.order[c] = c;
  std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) {
    return r.contributions(a) > r.contributions(b);
  });
  return r;
}

namespace {

void write_node(std::ostringstream& os, const Tree& tree, int i) {
  const auto& nd = tree.nodes[i];
  char buf[64];
  if (nd.feature >= 0) {
    std::snprintf(buf, sizeof buf, "%.17g", nd.threshold);
    os << "S " << nd.feature << ' ' << buf << '\n';
    write_node(os, tree, nd.left);
    write_node(os, tree, nd.right);
  } else {
    os << "L " << static_cast<long long>(nd.counts[0]) << ' '
       << static_cast<long long>(nd.counts[1]) << '\n';
  }
}

int read_node(std::istringstream& is, Tree& tree) {
  std::string kind;
  if (!(is >> kind)) throw std::runtime_error("forest: truncated tree");
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (kind == "S") {
    int feature;
    double threshold;
    if (!(is >> feature >> threshold)) throw std::runtime_error("forest: bad split node");
    tree.nodes[id].feature = feature;
    tree.nodes[id].threshold = threshold;
    const int l = read_node(is, tree);
    const int r = read_node(is, tree);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
  } else if (kind == "L") {
    double c0, c1;
    if (!(is >> c0 >> c1)) throw std::runtime_error("forest: bad leaf node");
    tree.nodes[id].counts[0] = c0;
    tree.nodes[id].counts[1] = c1;
  } else {
    throw std::runtime_error("forest: unknown node kind '" + kind + "'");
  }
  return id;
}

}  // namespace

std::string serialize_forest(const Forest& forest) {
  std::ostringstream os;
  os << "DPUF v1\n";
  os << "n_trees " << forest.trees.size() << '\n';
  os << "n_features " << forest.n_features << '\n';
  os << "importances";
  char buf[64];
  for (Eigen::Index i = 0; i < forest.importances.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", forest.importances(i));
    os << ' ' << buf;
  }
  os << '\n';
  for (std::size_t t = 0; t < forest.trees.size(); ++t) {
    os << "tree " << t << '\n';
    write_node(os, forest.trees[t], 0);
  }
  os << "end\n";
  return os.str();
}

Forest deserialize_forest(const std::string& text) {
  std::istringstream is(text);
  std::string tok;
  is >> tok;
  if (tok != "DPUF") throw std::runtime_error("forest: bad header");
  is >> tok;  // version
  std::size_t n_trees;
  int n_features;
  is >> tok >> n_trees;
  if (tok != "n_trees") throw std::runtime_error("forest: expected n_trees");
  is >> tok >> n_features;
  if (tok != "n_features") throw std::runtime_error("forest: expected n_features");
  is >> tok;
  if (tok != "importances") throw std::runtime_error("forest: expected importances");

  Forest forest;
  forest.n_features = n_features;
  forest.importances.resize(n_features);
  for (int i = 0; i < n_features; ++i)
    if (!(is >> forest.importances(i))) throw std::runtime_error("forest: bad importances");

  forest.trees.resize(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    std::size_t idx;
    is >> tok >> idx;
    if (tok != "tree" || idx != t) throw std::runtime_error("forest: tree ordering broken");
    read_node(is, forest.trees[t]);
  }
  return forest;
}

void save_forest(const std::string& path, const Forest& forest) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_forest: cannot open " + path);
  os << serialize_forest(forest);
}

Forest load_forest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_forest: cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return deserialize_forest(ss.str());
}

}  // namespace dpu
