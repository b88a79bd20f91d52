#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "relpred/dataset.hpp"
#include "relpred/forest.hpp"
#include "relpred/graph.hpp"
#include "relpred/metrics.hpp"
#include "relpred/sgns.hpp"
#include "relpred/walker.hpp"

namespace relpred {

struct PipelineConfig {
  std::filesystem::path nodes_file;
  std::filesystem::path edges_file;
  std::filesystem::path workdir = "relpred-work";

  SubgraphFilter subgraph = SubgraphFilter::defaults();
  WalkConfig walk;
  SgnsConfig sgns;
  DatasetOptions dataset;
  SplitConfig split;
  ForestConfig forest;
  std::vector<std::size_t> sweep_grid = kDefaultSweepGrid;
  ReportFormat report_format = ReportFormat::kText;

  // Every stage seed is derived from this one.
  std::uint64_t seed = 42;
  std::size_t workers = 1;

  // Pushes seed and workers into the stage configs and validates them.
  // Throws kConfigError.
  void finalize();
};

// Artifact locations inside the work directory.
struct Artifacts {
  explicit Artifacts(const std::filesystem::path& workdir);

  std::filesystem::path graph_nodes, graph_edges, ingest_log;
  std::filesystem::path subgraph_nodes, subgraph_edges;
  std::filesystem::path walks;
  std::filesystem::path embeddings;
  std::filesystem::path dataset, train, test;
  std::filesystem::path models_dir;
  std::filesystem::path report_text, report_csv, report_json;
  std::filesystem::path sweep;
  std::filesystem::path manifest;

  std::filesystem::path model(RelationCode relation) const;
};

// Each stage reads its upstream artifacts from the work directory (throwing
// kMissingArtifact if absent), writes its own, and appends one JSON line to
// the manifest.
IngestReport run_ingest(const PipelineConfig& cfg);
void run_subgraph(const PipelineConfig& cfg);
void run_walk(const PipelineConfig& cfg);
TrainStats run_embed(const PipelineConfig& cfg);
void run_dataset(const PipelineConfig& cfg);
void run_train(const PipelineConfig& cfg);
MetricsReport run_eval(const PipelineConfig& cfg);

struct SweepResult {
  std::vector<std::size_t> grid;
  // accuracy[relation label index][grid index]
  std::vector<std::vector<double>> accuracy;
  std::vector<double> mean_accuracy;  // across the six relations, per grid value
};
// Sweeps on an inner train/validation split of the training rows.
SweepResult run_sweep(const PipelineConfig& cfg);

// Probability of each label relation for the ordered pair (source, target),
// in label order. Throws kUnknownName for names without an embedding.
std::vector<std::pair<RelationCode, double>> run_query(const PipelineConfig& cfg, const std::string& source,
                                                       const std::string& target);

// ingest -> subgraph -> walk -> embed -> dataset -> train -> eval.
MetricsReport run_all(const PipelineConfig& cfg);

// Evaluates six trained forests on a test set.
MetricsReport evaluate(const std::vector<Forest>& forests, const EdgeDataset& test);

// Macro F1 of predicting 1 for every row and relation.
std::optional<double> always_positive_macro_f1(const EdgeDataset& test);

}  // namespace relpred
