#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "json.hpp"

namespace netsynth {

// Dense row-major design matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes);

  double predict(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct BoostingParams {
  std::size_t trees = 200;
  std::size_t max_depth = 4;
  double learning_rate = 0.1;
  std::size_t min_samples_leaf = 1;
};

// prediction = base + learning_rate * sum of tree outputs.
class BoostedScorer {
 public:
  BoostedScorer() = default;
  BoostedScorer(double base, double learning_rate, std::size_t feature_count,
                std::vector<RegressionTree> trees);

  double predict(std::span<const double> x) const;
  double base() const { return base_; }
  double learning_rate() const { return learning_rate_; }
  std::size_t feature_count() const { return feature_count_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

  bool operator==(const BoostedScorer&) const = default;

 private:
  double base_ = 0.0;
  double learning_rate_ = 0.1;
  std::size_t feature_count_ = 0;
  std::vector<RegressionTree> trees_;
};

// Squared-error gradient boosting with exact greedy splits. When mse_trace is
// given it receives the training MSE after the base prediction and after each
// added tree (trees + 1 entries).
BoostedScorer train_boosted(const FeatureMatrix& x, std::span<const double> y,
                            const BoostingParams& params, std::vector<double>* mse_trace = nullptr);

void to_json(nlohmann::json& j, const BoostedScorer& s);
void from_json(const nlohmann::json& j, BoostedScorer& s);

}  // namespace netsynth
