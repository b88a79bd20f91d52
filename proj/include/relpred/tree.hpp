#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace relpred {

// Row-major feature matrix with binary labels and per-sample weights.
struct TrainingSet {
  std::size_t n_features = 0;
  std::vector<double> x;
  std::vector<std::uint8_t> y;
  std::vector<double> w;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * n_features, n_features}; }
  double value(std::size_t i, std::size_t f) const { return x[i * n_features + f]; }

  void add(std::span<const double> features, std::uint8_t label, double weight = 1.0);
};

enum class MaxFeatures { kSqrt, kAll, kFixed };

struct TreeConfig {
  std::optional<std::size_t> max_depth;  // nullopt: unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::optional<std::size_t> max_leaf_nodes;  // nullopt: unlimited
  MaxFeatures max_features = MaxFeatures::kSqrt;
  std::size_t max_features_fixed = 0;  // used with kFixed
  std::uint64_t seed = 0;

  void validate() const;
  // Number of candidate features drawn per node (at least 1).
  std::size_t features_per_split(std::size_t n_features) const;
};

// 1 - p+^2 - p-^2. Accepts weighted counts. Throws kEmptyCounts.
double gini_impurity(double positives, double negatives);

struct Split {
  std::size_t feature;
  double threshold;  // left child gets value <= threshold
  double decrease;   // parent impurity minus weighted child impurities
};

// Exhaustive scan over the candidate features and the midpoints between
// consecutive distinct values. Ties go to the lowest feature, then the
// lowest threshold. nullopt if no split strictly decreases impurity while
// leaving min_samples_leaf on both sides.
std::optional<Split> best_split(const TrainingSet& data, std::span<const std::size_t> samples,
                                std::span<const std::size_t> candidate_features, const TreeConfig& cfg);

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double positive_weight = 0.0;
  double total_weight = 0.0;
  std::uint64_t samples = 0;

  bool is_leaf() const { return feature < 0; }
  double positive_fraction() const { return total_weight > 0 ? positive_weight / total_weight : 0.0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  // Checks structural validity (child indices, feature range).
  DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features);

  std::span<const TreeNode> nodes() const { return nodes_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  const TreeNode& leaf_for(std::span<const double> features) const;
  double predict_proba(std::span<const double> features) const { return leaf_for(features).positive_fraction(); }

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

// Grows a CART tree on the given sample indices (duplicates allowed, as in
// a bootstrap resample). Throws kNoSamples.
DecisionTree fit_tree(const TrainingSet& data, std::span<const std::size_t> samples, const TreeConfig& cfg);
DecisionTree fit_tree(const TrainingSet& data, const TreeConfig& cfg);

}  // namespace relpred
