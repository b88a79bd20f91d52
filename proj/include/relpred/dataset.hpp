#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relpred/embedding.hpp"
#include "relpred/graph.hpp"

namespace relpred {

inline constexpr std::size_t kLabelCount = kLabelOrder.size();

struct DatasetRow {
  std::string source_name;
  std::string target_name;
  NodeId source_id = 0;
  NodeId target_id = 0;
  std::vector<double> features;  // [source embedding | target embedding]
  std::array<std::uint8_t, kLabelCount> labels{};

  bool operator==(const DatasetRow&) const = default;
};

// Rows sorted by (source_id, target_id); labels follow kLabelOrder.
struct EdgeDataset {
  std::vector<DatasetRow> rows;
  std::size_t feature_dim = 0;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  bool operator==(const EdgeDataset&) const = default;
};

struct DatasetOptions {
  double min_label_weight = 80.0;  // strict: weight > min_label_weight
  // Extra all-zero-label rows drawn uniformly from unconnected ordered
  // pairs, as a multiple of the related-pair row count. 0 disables.
  double unconnected_ratio = 0.0;
  std::uint64_t seed = 0;
};

// One row per ordered pair (u, v) joined by at least one label relation
// with weight > min_label_weight. Throws kMissingEmbedding.
EdgeDataset build_dataset(const TypedGraph& g, const EmbeddingMatrix& e, const DatasetOptions& options = {});

struct LabelCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

std::array<LabelCounts, kLabelCount> per_label_counts(const EdgeDataset& ds);

struct SplitConfig {
  double test_fraction = 0.2;
  std::optional<RelationCode> stratify_on = RelationCode::kSyn;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  EdgeDataset train;
  EdgeDataset test;
  // Set when stratification was requested but the label has fewer than two
  // positives or negatives; the split was made unstratified instead.
  bool stratification_fallback = false;
};

// Disjoint, exhaustive, deterministic in the seed. Both parts keep the
// canonical row order. Throws kTooFewRows below two rows.
DatasetSplit split(const EdgeDataset& ds, const SplitConfig& cfg);

// CSV: source,target,source_id,target_id,f0..f{n-1},<six label columns>.
std::string serialize_dataset(const EdgeDataset& ds);
EdgeDataset parse_dataset(std::string_view text);
void write_dataset(const EdgeDataset& ds, const std::filesystem::path& path);
EdgeDataset read_dataset(const std::filesystem::path& path);

}  // namespace relpred
