#include "relpred/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "relpred/error.hpp"
#include "relpred/random.hpp"

namespace relpred {

void TrainingSet::add(std::span<const double> features, std::uint8_t label, double weight) {
  if (n_features == 0 && y.empty()) n_features = features.size();
  if (features.size() != n_features) fail(ErrorKind::kDimensionMismatch, "training row length");
  x.insert(x.end(), features.begin(), features.end());
  y.push_back(label ? 1 : 0);
  w.push_back(weight);
}

void TreeConfig::validate() const {
  if (min_samples_split < 2) fail(ErrorKind::kInvalidArgument, "min_samples_split must be >= 2");
  if (min_samples_leaf < 1) fail(ErrorKind::kInvalidArgument, "min_samples_leaf must be >= 1");
  if (max_leaf_nodes && *max_leaf_nodes < 2) fail(ErrorKind::kInvalidArgument, "max_leaf_nodes must be >= 2");
  if (max_features == MaxFeatures::kFixed && max_features_fixed < 1) {
    fail(ErrorKind::kInvalidArgument, "fixed max_features must be >= 1");
  }
}

std::size_t TreeConfig::features_per_split(std::size_t n_features) const {
  std::size_t k = n_features;
  switch (max_features) {
    case MaxFeatures::kAll: break;
    case MaxFeatures::kSqrt: k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features)))); break;
    case MaxFeatures::kFixed: k = max_features_fixed; break;
  }
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(1, n_features));
}

double gini_impurity(double positives, double negatives) {
  const double total = positives + negatives;
  if (!(total > 0.0)) fail(ErrorKind::kEmptyCounts, "gini of an empty node");
  const double p = positives / total;
  const double q = negatives / total;
  return 1.0 - p * p - q * q;
}

namespace {

// Decreases at or below this are treated as rounding noise.
constexpr double kMinDecrease = 1e-12;

double midpoint(double a, double b) {
  double t = a / 2 + b / 2;
  if (!(t > a) || t >= b) t = a;
  return t;
}

}  // namespace

std::optional<Split> best_split(const TrainingSet& data, std::span<const std::size_t> samples,
                                std::span<const std::size_t> candidate_features, const TreeConfig& cfg) {
  const std::size_t n = samples.size();
  if (n < cfg.min_samples_split || n < 2 * cfg.min_samples_leaf) return std::nullopt;

  double pos = 0.0;
  double total = 0.0;
  for (auto i : samples) {
    total += data.w[i];
    if (data.y[i]) pos += data.w[i];
  }
  if (!(total > 0.0)) return std::nullopt;
  const double parent = gini_impurity(pos, total - pos);
  if (parent <= 0.0) return std::nullopt;

  std::optional<Split> best;
  std::vector<std::size_t> order(samples.begin(), samples.end());
  std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
  std::sort(features.begin(), features.end());

  for (std::size_t f : features) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = data.value(a, f);
      const double vb = data.value(b, f);
      return va < vb || (va == vb && a < b);
    });
    double left_pos = 0.0;
    double left_total = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const std::size_t i = order[k];
      left_total += data.w[i];
      if (data.y[i]) left_pos += data.w[i];
      const double a = data.value(i, f);
      const double b = data.value(order[k + 1], f);
      if (!(a < b)) continue;
      const std::size_t n_left = k + 1;
      if (n_left < cfg.min_samples_leaf || n - n_left < cfg.min_samples_leaf) continue;
      const double right_total = total - left_total;
      const double right_pos = pos - left_pos;
      double child = 0.0;
      if (left_total > 0) child += left_total / total * gini_impurity(left_pos, left_total - left_pos);
      if (right_total > 0) child += right_total / total * gini_impurity(right_pos, right_total - right_pos);
      const double decrease = parent - child;
      if (decrease > kMinDecrease && (!best || decrease > best->decrease)) best = Split{f, midpoint(a, b), decrease};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// DecisionTree

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features)
    : nodes_(std::move(nodes)), n_features_(n_features) {
  if (nodes_.empty()) fail(ErrorKind::kFormatError, "tree has no nodes");
  const auto count = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < count; ++i) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) continue;
    if (static_cast<std::size_t>(node.feature) >= n_features_ || node.left <= i || node.right <= i ||
        node.left >= count || node.right >= count) {
      fail(ErrorKind::kFormatError, "tree node " + std::to_string(i) + " is malformed");
    }
  }
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> features) const {
  if (features.size() != n_features_) {
    fail(ErrorKind::kDimensionMismatch,
         "expected " + std::to_string(n_features_) + " features, got " + std::to_string(features.size()));
  }
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                     : node.right);
  }
  return nodes_[i];
}

// ---------------------------------------------------------------------------
// Growth

namespace {

struct Pending {
  std::size_t node;
  std::size_t depth;
  std::vector<std::size_t> samples;
  std::optional<Split> split;
};

class TreeGrower {
 public:
  TreeGrower(const TrainingSet& data, const TreeConfig& cfg)
      : data_(data), cfg_(cfg), rng_(cfg.seed), k_(cfg.features_per_split(data.n_features)) {}

  DecisionTree grow(std::span<const std::size_t> samples) {
    if (cfg_.max_leaf_nodes) {
      grow_best_first(samples);
    } else {
      grow_depth_first(samples);
    }
    return DecisionTree(std::move(nodes_), data_.n_features);
  }

 private:
  Pending make_node(std::vector<std::size_t> samples, std::size_t depth) {
    TreeNode node;
    node.samples = samples.size();
    for (auto i : samples) {
      node.total_weight += data_.w[i];
      if (data_.y[i]) node.positive_weight += data_.w[i];
    }
    nodes_.push_back(node);
    Pending p{nodes_.size() - 1, depth, std::move(samples), std::nullopt};
    const bool depth_ok = !cfg_.max_depth || depth < *cfg_.max_depth;
    if (depth_ok && p.samples.size() >= cfg_.min_samples_split) {
      p.split = best_split(data_, p.samples, draw_features(), cfg_);
    }
    return p;
  }

  std::vector<std::size_t> draw_features() {
    const std::size_t m = data_.n_features;
    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (k_ >= m) return all;
    // Partial Fisher-Yates: the first k_ entries are a uniform draw.
    for (std::size_t i = 0; i < k_; ++i) std::swap(all[i], all[i + rng_.below(m - i)]);
    all.resize(k_);
    return all;
  }

  std::pair<Pending, Pending> expand(Pending& p) {
    const Split& s = *p.split;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : p.samples) (data_.value(i, s.feature) <= s.threshold ? left : right).push_back(i);
    p.samples.clear();
    p.samples.shrink_to_fit();
    auto l = make_node(std::move(left), p.depth + 1);
    auto r = make_node(std::move(right), p.depth + 1);
    auto& node = nodes_[p.node];
    node.feature = static_cast<std::int32_t>(s.feature);
    node.threshold = s.threshold;
    node.left = static_cast<std::int32_t>(l.node);
    node.right = static_cast<std::int32_t>(r.node);
    return {std::move(l), std::move(r)};
  }

  void grow_depth_first(std::span<const std::size_t> samples) {
    std::vector<Pending> stack;
    stack.push_back(make_node({samples.begin(), samples.end()}, 0));
    while (!stack.empty()) {
      Pending p = std::move(stack.back());
      stack.pop_back();
      if (!p.split) continue;
      auto [l, r] = expand(p);
      stack.push_back(std::move(r));
      stack.push_back(std::move(l));
    }
  }

  // With a leaf budget, expand the frontier node with the largest
  // total-weight-scaled impurity decrease first.
  void grow_best_first(std::span<const std::size_t> samples) {
    auto priority = [this](const Pending& p) { return p.split->decrease * nodes_[p.node].total_weight; };
    auto cmp = [&](const Pending& a, const Pending& b) {
      const double pa = priority(a);
      const double pb = priority(b);
      return pa < pb || (pa == pb && a.node > b.node);
    };
    std::priority_queue<Pending, std::vector<Pending>, decltype(cmp)> frontier(cmp);
    auto root = make_node({samples.begin(), samples.end()}, 0);
    if (root.split) frontier.push(std::move(root));
    std::size_t leaves = 1;
    while (!frontier.empty() && leaves < *cfg_.max_leaf_nodes) {
      Pending p = frontier.top();
      frontier.pop();
      auto [l, r] = expand(p);
      ++leaves;
      if (l.split) frontier.push(std::move(l));
      if (r.split) frontier.push(std::move(r));
    }
  }

  const TrainingSet& data_;
  const TreeConfig& cfg_;
  Rng rng_;
  std::size_t k_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree fit_tree(const TrainingSet& data, std::span<const std::size_t> samples, const TreeConfig& cfg) {
  cfg.validate();
  if (samples.empty()) fail(ErrorKind::kNoSamples, "cannot fit a tree on zero samples");
  return TreeGrower(data, cfg).grow(samples);
}

DecisionTree fit_tree(const TrainingSet& data, const TreeConfig& cfg) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_tree(data, all, cfg);
}

}  // namespace relpred
