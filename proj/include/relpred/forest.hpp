#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "relpred/dataset.hpp"
#include "relpred/graph.hpp"
#include "relpred/tree.hpp"

namespace relpred {

enum class ClassWeight { kNone, kBalanced };

struct ForestConfig {
  std::size_t n_estimators = 70;
  bool bootstrap = true;
  ClassWeight class_weight = ClassWeight::kNone;
  TreeConfig tree;  // tree.seed is ignored; per-tree seeds come from `seed`
  std::uint64_t seed = 0;
  std::size_t workers = 1;  // does not affect the fitted model

  void validate() const;
};

inline constexpr int kModelFormatVersion = 1;

class Forest {
 public:
  RelationCode relation = RelationCode::kSyn;
  ForestConfig config;
  std::size_t feature_dim = 0;
  // Training labels were all identical; the forest still predicts.
  bool single_class = false;
  std::vector<DecisionTree> trees;

  // Mean over trees of the reached leaf's positive fraction.
  // Throws kDimensionMismatch.
  double predict_proba(std::span<const double> features) const;
  // 1 iff predict_proba >= threshold.
  int predict_label(std::span<const double> features, double threshold = 0.5) const;

  bool operator==(const Forest& other) const;
};

// Label column `relation` of the dataset as a training set, with
// BALANCED class weights n / (2 * class_count) when requested.
TrainingSet training_set(const EdgeDataset& ds, RelationCode relation, ClassWeight class_weight = ClassWeight::kNone);

// n indices drawn uniformly with replacement from [0, n).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

// Rows are first put in canonical (source_id, target_id) order, so the
// result does not depend on the input row order. Throws kNoSamples, and
// kInvalidArgument for a non-label relation.
Forest fit_forest(const EdgeDataset& train, RelationCode relation, const ForestConfig& cfg);

struct SweepPoint {
  std::size_t n_estimators;
  double accuracy;
};

inline const std::vector<std::size_t> kDefaultSweepGrid = {10, 30, 50, 70, 90, 110, 130, 150, 170};

// One forest per grid value, each with a seed derived from
// (base_cfg.seed, value), scored by accuracy on `validation`.
std::vector<SweepPoint> sweep_n_estimators(const EdgeDataset& train, const EdgeDataset& validation,
                                           RelationCode relation, std::span<const std::size_t> grid,
                                           const ForestConfig& base_cfg);

std::string serialize_forest(const Forest& f);
Forest parse_forest(std::string_view text);
void write_forest(const Forest& f, const std::filesystem::path& path);
Forest read_forest(const std::filesystem::path& path);

}  // namespace relpred
