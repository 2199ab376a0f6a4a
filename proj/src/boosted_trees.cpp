#include "netsynth/boosted_trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netsynth/errors.hpp"

namespace netsynth {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw PreconditionError("regression tree needs a root");
  const int n = static_cast<int>(nodes_.size());
  for (int i = 0; i < n; ++i) {
    const auto& node = nodes_[i];
    if (node.feature >= 0 && (node.left <= i || node.right <= i || node.left >= n || node.right >= n)) {
      throw PreconditionError("regression tree child index out of order");
    }
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  int i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& node = nodes_[i];
    i = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t out = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out = std::max(out, d[i]);
    if (nodes_[i].feature >= 0) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].right] = d[i] + 1;
    }
  }
  return out;
}

BoostedScorer::BoostedScorer(double base, double learning_rate, std::size_t feature_count,
                             std::vector<RegressionTree> trees)
    : base_(base), learning_rate_(learning_rate), feature_count_(feature_count), trees_(std::move(trees)) {
  for (const auto& t : trees_) {
    for (const auto& node : t.nodes()) {
      if (node.feature >= static_cast<int>(feature_count_)) {
        throw PreconditionError("tree splits on a feature outside the input width");
      }
    }
  }
}

double BoostedScorer::predict(std::span<const double> x) const {
  if (x.size() != feature_count_) throw PreconditionError("scorer input has the wrong width");
  double s = 0.0;
  for (const auto& t : trees_) s += t.predict(x);
  return base_ + learning_rate_ * s;
}

namespace {

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// Level-wise exact greedy growth. `order` holds, per feature, the row indices
// sorted by that feature's value.
RegressionTree grow_tree(const FeatureMatrix& x, const std::vector<double>& residual,
                         const std::vector<std::vector<std::size_t>>& order,
                         const BoostingParams& params) {
  const std::size_t n = x.rows;
  std::vector<TreeNode> nodes(1);
  std::vector<int> node_of(n, 0);
  std::vector<double> sum(1, 0.0);
  std::vector<std::size_t> count(1, n);
  for (std::size_t i = 0; i < n; ++i) sum[0] += residual[i];

  std::vector<int> frontier{0};
  for (std::size_t depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    const std::size_t total_nodes = nodes.size();
    std::vector<char> open(total_nodes, 0);
    for (int id : frontier) open[id] = 1;
    std::vector<SplitCandidate> best(total_nodes);
    std::vector<double> left_sum(total_nodes);
    std::vector<std::size_t> left_count(total_nodes);
    std::vector<double> last_value(total_nodes);

    for (std::size_t f = 0; f < x.cols; ++f) {
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(left_count.begin(), left_count.end(), 0);
      for (std::size_t i : order[f]) {
        const int id = node_of[i];
        if (!open[id]) continue;
        const double v = x.at(i, f);
        const std::size_t nl = left_count[id];
        if (nl >= params.min_samples_leaf && count[id] - nl >= params.min_samples_leaf &&
            v > last_value[id]) {
          const double sl = left_sum[id];
          const double sr = sum[id] - sl;
          const double nr = static_cast<double>(count[id] - nl);
          const double gain = sl * sl / static_cast<double>(nl) + sr * sr / nr -
                              sum[id] * sum[id] / static_cast<double>(count[id]);
          if (gain > best[id].gain) {
            double mid = last_value[id] + 0.5 * (v - last_value[id]);
            if (!(mid < v)) mid = last_value[id];
            best[id] = {gain, static_cast<int>(f), mid};
          }
        }
        left_sum[id] += residual[i];
        ++left_count[id];
        last_value[id] = v;
      }
    }

    std::vector<int> next_frontier;
    std::vector<int> left_of(total_nodes, -1);
    for (int id : frontier) {
      const double scale = sum[id] * sum[id] / static_cast<double>(count[id]) + 1.0;
      if (best[id].feature < 0 || best[id].gain <= 1e-12 * scale) continue;
      auto& node = nodes[id];
      node.feature = best[id].feature;
      node.threshold = best[id].threshold;
      node.left = static_cast<int>(nodes.size());
      node.right = node.left + 1;
      left_of[id] = node.left;
      nodes.emplace_back();
      nodes.emplace_back();
      sum.push_back(0.0);
      sum.push_back(0.0);
      count.push_back(0);
      count.push_back(0);
      next_frontier.push_back(node.left);
      next_frontier.push_back(node.left + 1);
    }
    if (next_frontier.empty()) break;
    for (std::size_t i = 0; i < n; ++i) {
      const int id = node_of[i];
      if (left_of[id] < 0) continue;
      const auto& node = nodes[id];
      const int child = x.at(i, node.feature) <= node.threshold ? node.left : node.right;
      node_of[i] = child;
      sum[child] += residual[i];
      ++count[child];
    }
    frontier = std::move(next_frontier);
  }
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    if (nodes[id].feature < 0) nodes[id].value = count[id] ? sum[id] / count[id] : 0.0;
  }
  return RegressionTree(std::move(nodes));
}

}  // namespace

BoostedScorer train_boosted(const FeatureMatrix& x, std::span<const double> y,
                            const BoostingParams& params, std::vector<double>* mse_trace) {
  if (x.rows == 0 || x.rows != y.size()) throw PreconditionError("boosting needs >= 1 labelled row");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw PreconditionError("boosting learning rate must be in (0, 1]");
  }
  if (params.min_samples_leaf == 0) throw PreconditionError("min_samples_leaf must be >= 1");
  const std::size_t n = x.rows;
  const double base = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> pred(n, base);
  std::vector<double> residual(n);

  std::vector<std::vector<std::size_t>> order(x.cols, std::vector<std::size_t>(n));
  for (std::size_t f = 0; f < x.cols; ++f) {
    std::iota(order[f].begin(), order[f].end(), 0);
    std::stable_sort(order[f].begin(), order[f].end(),
                     [&](std::size_t a, std::size_t b) { return x.at(a, f) < x.at(b, f); });
  }

  auto mse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (y[i] - pred[i]) * (y[i] - pred[i]);
    return s / static_cast<double>(n);
  };
  if (mse_trace) {
    mse_trace->clear();
    mse_trace->push_back(mse());
  }

  std::vector<RegressionTree> trees;
  trees.reserve(params.trees);
  for (std::size_t t = 0; t < params.trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - pred[i];
    RegressionTree tree = grow_tree(x, residual, order, params);
    for (std::size_t i = 0; i < n; ++i) pred[i] += params.learning_rate * tree.predict(x.row(i));
    trees.push_back(std::move(tree));
    if (mse_trace) mse_trace->push_back(mse());
  }
  return BoostedScorer(base, params.learning_rate, x.cols, std::move(trees));
}

void to_json(nlohmann::json& j, const BoostedScorer& s) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : s.trees()) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : t.nodes()) {
      if (node.feature < 0) {
        nodes.push_back({{"leaf", node.value}});
      } else {
        nodes.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  j = nlohmann::json{{"base", s.base()},
                     {"learning_rate", s.learning_rate()},
                     {"feature_count", s.feature_count()},
                     {"trees", std::move(trees)}};
}

void from_json(const nlohmann::json& j, BoostedScorer& s) {
  std::vector<RegressionTree> trees;
  for (const auto& t : j.at("trees")) {
    std::vector<TreeNode> nodes;
    for (const auto& n : t) {
      TreeNode node;
      if (n.contains("leaf")) {
        node.value = n.at("leaf").get<double>();
      } else {
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
      }
      nodes.push_back(node);
    }
    trees.emplace_back(std::move(nodes));
  }
  s = BoostedScorer(j.at("base").get<double>(), j.at("learning_rate").get<double>(),
                    j.at("feature_count").get<std::size_t>(), std::move(trees));
}

}  // namespace netsynth
