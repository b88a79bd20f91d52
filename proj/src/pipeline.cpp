#include "relpred/pipeline.hpp"

#include <chrono>
#include <fstream>

#include "json.hpp"
#include "relpred/error.hpp"
#include "relpred/random.hpp"
#include "relpred/simd/kernels.hpp"
#include "relpred/text_io.hpp"

namespace relpred {

namespace fs = std::filesystem;

void PipelineConfig::finalize() {
  if (workers < 1) fail(ErrorKind::kConfigError, "workers must be >= 1");
  walk.seed = derive_seed(seed, {1});
  sgns.seed = derive_seed(seed, {2});
  dataset.seed = derive_seed(seed, {3});
  split.seed = derive_seed(seed, {4});
  forest.seed = derive_seed(seed, {5});
  walk.workers = sgns.workers = forest.workers = workers;
  try {
    if (!(subgraph.min_edge_weight >= 0.0)) fail(ErrorKind::kInvalidArgument, "min_edge_weight must be >= 0");
    if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0)) {
      fail(ErrorKind::kInvalidArgument, "test_fraction must be in (0, 1)");
    }
    if (sweep_grid.empty()) fail(ErrorKind::kInvalidArgument, "sweep grid is empty");
    walk.validate();
    sgns.validate();
    forest.validate();
  } catch (const Error& e) {
    fail(ErrorKind::kConfigError, e.what());
  }
}

Artifacts::Artifacts(const fs::path& workdir)
    : graph_nodes(workdir / "graph.nodes.tsv"),
      graph_edges(workdir / "graph.edges.tsv"),
      ingest_log(workdir / "ingest.log"),
      subgraph_nodes(workdir / "subgraph.nodes.tsv"),
      subgraph_edges(workdir / "subgraph.edges.tsv"),
      walks(workdir / "walks.txt"),
      embeddings(workdir / "embeddings.txt"),
      dataset(workdir / "dataset.csv"),
      train(workdir / "train.csv"),
      test(workdir / "test.csv"),
      models_dir(workdir / "models"),
      report_text(workdir / "report.txt"),
      report_csv(workdir / "report.csv"),
      report_json(workdir / "report.json"),
      sweep(workdir / "sweep.csv"),
      manifest(workdir / "manifest.jsonl") {}

fs::path Artifacts::model(RelationCode relation) const {
  return models_dir / (RelationType(relation).str() + ".model");
}

namespace {

using Clock = std::chrono::steady_clock;

void require(const fs::path& p) {
  if (!fs::exists(p)) fail(ErrorKind::kMissingArtifact, p.string() + " (run the upstream stage first)");
}

// Records one stage in the manifest. Inputs are hashed when the stage
// starts, outputs when it ends.
class StageRecord {
 public:
  StageRecord(const PipelineConfig& cfg, std::string stage, std::vector<fs::path> inputs, std::uint64_t seed)
      : cfg_(cfg), stage_(std::move(stage)), seed_(seed), start_(Clock::now()) {
    for (const auto& p : inputs) {
      require(p);
      inputs_.emplace_back(p.filename().string(), hex64(hash_file(p)));
    }
  }

  void finish(const std::vector<fs::path>& outputs) {
    nlohmann::ordered_json line;
    line["stage"] = stage_;
    auto& in = line["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [name, hash] : inputs_) in[name] = hash;
    auto& out = line["outputs"] = nlohmann::ordered_json::object();
    for (const auto& p : outputs) out[p.filename().string()] = hex64(hash_file(p));
    line["seed"] = seed_;
    line["workers"] = cfg_.workers;
    line["duration_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start_).count();
    const Artifacts a(cfg_.workdir);
    fs::create_directories(cfg_.workdir);
    std::ofstream f(a.manifest, std::ios::app);
    if (!f) fail(ErrorKind::kIoError, "cannot append to " + a.manifest.string());
    f << line.dump() << '\n';
  }

 private:
  const PipelineConfig& cfg_;
  std::string stage_;
  std::uint64_t seed_;
  Clock::time_point start_;
  std::vector<std::pair<std::string, std::string>> inputs_;
};

TypedGraph load_graph(const fs::path& nodes, const fs::path& edges) {
  require(nodes);
  require(edges);
  return ingest_graph(nodes, edges).graph;
}

std::vector<Forest> load_models(const Artifacts& a) {
  std::vector<Forest> forests;
  for (auto code : kLabelOrder) forests.push_back(read_forest(a.model(code)));
  return forests;
}

std::vector<fs::path> model_paths(const Artifacts& a) {
  std::vector<fs::path> out;
  for (auto code : kLabelOrder) out.push_back(a.model(code));
  return out;
}

}  // namespace

IngestReport run_ingest(const PipelineConfig& cfg) {
  if (cfg.nodes_file.empty() || cfg.edges_file.empty()) {
    fail(ErrorKind::kConfigError, "nodes_file and edges_file must be set");
  }
  const Artifacts a(cfg.workdir);
  StageRecord rec(cfg, "ingest", {cfg.nodes_file, cfg.edges_file}, cfg.seed);
  auto result = ingest_graph(cfg.nodes_file, cfg.edges_file);
  write_graph(result.graph, a.graph_nodes, a.graph_edges);
  const auto& r = result.report;
  std::string log = "nodes accepted " + std::to_string(r.nodes_accepted) + " rejected " +
                    std::to_string(r.nodes_rejected) + "\nedges accepted " + std::to_string(r.edges_accepted) +
                    " rejected " + std::to_string(r.edges_rejected) + "\n";
  for (const auto& issue : r.issues) {
    log += issue.file + ":" + std::to_string(issue.line) + ": " +
           (issue.kind == IngestIssue::Kind::kDanglingEdge ? "DanglingEdge" : "MalformedRecord") + ": " +
           issue.reason + "\n";
  }
  write_file(a.ingest_log, log);
  rec.finish({a.graph_nodes, a.graph_edges, a.ingest_log});
  return std::move(result.report);
}

void run_subgraph(const PipelineConfig& cfg) {
  const Artifacts a(cfg.workdir);
  StageRecord rec(cfg, "subgraph", {a.graph_nodes, a.graph_edges}, cfg.seed);
  const auto g = load_graph(a.graph_nodes, a.graph_edges);
  write_graph(select_subgraph(g, cfg.subgraph), a.subgraph_nodes, a.subgraph_edges);
  rec.finish({a.subgraph_nodes, a.subgraph_edges});
}

void run_walk(const PipelineConfig& cfg) {
  const Artifacts a(cfg.workdir);
  StageRecord rec(cfg, "walk", {a.subgraph_nodes, a.subgraph_edges}, cfg.walk.seed);
  const auto g = load_graph(a.subgraph_nodes, a.subgraph_edges);
  write_walks(generate_walks(g, cfg.walk), g, a.walks);
  rec.finish({a.walks});
}

TrainStats run_embed(const PipelineConfig& cfg) {
  const Artifacts a(cfg.workdir);
  StageRecord rec(cfg, "embed", {a.walks}, cfg.sgns.seed);
  TrainStats stats;
  const auto corpus = TokenCorpus::from_names(read_walks(a.walks));
  write_embeddings(train_embeddings(corpus, cfg.sgns, &stats), a.embeddings);
  rec.finish({a.embeddings});
  return stats;
}

void run_dataset(const PipelineConfig& cfg) {
  const Artifacts a(cfg.workdir);
  StageRecord rec(cfg, "dataset", {a.subgraph_nodes, a.subgraph_edges, a.embeddings}, cfg.dataset.seed);
  const auto g = load_graph(a.subgraph_nodes, a.subgraph_edges);
  const auto ds = build_dataset(g, read_embeddings(a.embeddings), cfg.dataset);
  const auto parts = split(ds, cfg.split);
  write_dataset(ds, a.dataset);
  write_dataset(parts.train, a.train);
  write_dataset(parts.test, a.test);
  rec.finish({a.dataset, a.train, a.test});
}

void run_train(const PipelineConfig& cfg) {
  const Artifacts a(cfg.workdir);
  StageRecord rec(cfg, "train", {a.train}, cfg.forest.seed);
  const auto train = read_dataset(a.train);
  for (std::size_t k = 0; k < kLabelOrder.size(); ++k) {
    ForestConfig fc = cfg.forest;
    fc.seed = derive_seed(cfg.forest.seed, {k});
    write_forest(fit_forest(train, kLabelOrder[k], fc), a.model(kLabelOrder[k]));
  }
  rec.finish(model_paths(a));
}

MetricsReport evaluate(const std::vector<Forest>& forests, const EdgeDataset& test) {
  MetricsReport report;
  for (const auto& f : forests) {
    const auto column = label_index(f.relation);
    std::vector<std::uint8_t> preds;
    std::vector<std::uint8_t> labels;
    for (const auto& row : test.rows) {
      preds.push_back(static_cast<std::uint8_t>(f.predict_label(row.features)));
      labels.push_back(row.labels[*column]);
    }
    const auto cm = confusion(preds, labels);
    report.per_relation.push_back({f.relation, cm, metrics(cm)});
  }
  report.macro = macro_average(report);
  return report;
}

std::optional<double> always_positive_macro_f1(const EdgeDataset& test) {
  std::vector<RelationMetrics> rows;
  const std::vector<std::uint8_t> all_ones(test.size(), 1);
  for (std::size_t k = 0; k < kLabelOrder.size(); ++k) {
    std::vector<std::uint8_t> labels;
    for (const auto& row : test.rows) labels.push_back(row.labels[k]);
    const auto cm = confusion(all_ones, labels);
    rows.push_back({kLabelOrder[k], cm, metrics(cm)});
  }
  return macro_average(rows).f1;
}

MetricsReport run_eval(const PipelineConfig& cfg) {
  const Artifacts a(cfg.workdir);
  auto inputs = model_paths(a);
  inputs.insert(inputs.begin(), a.test);
  StageRecord rec(cfg, "eval", inputs, cfg.seed);
  const auto test = read_dataset(a.test);
  auto report = evaluate(load_models(a), test);
  const auto baseline = always_positive_macro_f1(test);
  report.metadata = {
      {"seed", std::to_string(cfg.seed)},
      {"test_rows", std::to_string(test.size())},
      {"dataset_fingerprint", hex64(hash_file(a.dataset))},
      {"test_fingerprint", hex64(hash_file(a.test))},
      {"min_edge_weight", format_double(cfg.subgraph.min_edge_weight)},
      {"min_label_weight", format_double(cfg.dataset.min_label_weight)},
      {"n_estimators", std::to_string(cfg.forest.n_estimators)},
      {"embedding_dim", std::to_string(cfg.sgns.dim)},
      {"simd", std::string(simd::to_string(simd::active().isa))},
      {"baseline_always_positive_macro_f1", baseline ? format_double(*baseline) : "undefined"},
  };
  write_file(a.report_text, render_report(report, ReportFormat::kText));
  write_file(a.report_csv, render_report(report, ReportFormat::kCsv));
  write_file(a.report_json, render_report(report, ReportFormat::kJson));
  rec.finish({a.report_text, a.report_csv, a.report_json});
  return report;
}

SweepResult run_sweep(const PipelineConfig& cfg) {
  const Artifacts a(cfg.workdir);
  StageRecord rec(cfg, "sweep", {a.train}, cfg.forest.seed);
  const auto train = read_dataset(a.train);
  SplitConfig inner = cfg.split;
  inner.seed = derive_seed(cfg.split.seed, {0x7377});
  const auto parts = split(train, inner);

  SweepResult result;
  result.grid = cfg.sweep_grid;
  result.mean_accuracy.assign(result.grid.size(), 0.0);
  for (std::size_t k = 0; k < kLabelOrder.size(); ++k) {
    ForestConfig fc = cfg.forest;
    fc.seed = derive_seed(cfg.forest.seed, {k});
    const auto points = sweep_n_estimators(parts.train, parts.test, kLabelOrder[k], result.grid, fc);
    auto& acc = result.accuracy.emplace_back();
    for (std::size_t i = 0; i < points.size(); ++i) {
      acc.push_back(points[i].accuracy);
      result.mean_accuracy[i] += points[i].accuracy / static_cast<double>(kLabelOrder.size());
    }
  }

  std::string csv = "n_estimators";
  for (auto code : kLabelOrder) csv += "," + RelationType(code).str();
  csv += ",mean\n";
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    csv += std::to_string(result.grid[i]);
    for (const auto& acc : result.accuracy) csv += "," + format_double(acc[i]);
    csv += "," + format_double(result.mean_accuracy[i]) + "\n";
  }
  write_file(a.sweep, csv);
  rec.finish({a.sweep});
  return result;
}

std::vector<std::pair<RelationCode, double>> run_query(const PipelineConfig& cfg, const std::string& source,
                                                       const std::string& target) {
  const Artifacts a(cfg.workdir);
  require(a.embeddings);
  const auto e = read_embeddings(a.embeddings);
  std::vector<double> features;
  for (const auto& name : {source, target}) {
    const auto v = e.vector(name);
    features.insert(features.end(), v.begin(), v.end());
  }
  std::vector<std::pair<RelationCode, double>> out;
  for (const auto& f : load_models(a)) out.emplace_back(f.relation, f.predict_proba(features));
  return out;
}

MetricsReport run_all(const PipelineConfig& cfg) {
  run_ingest(cfg);
  run_subgraph(cfg);
  run_walk(cfg);
  run_embed(cfg);
  run_dataset(cfg);
  run_train(cfg);
  return run_eval(cfg);
}

}  // namespace relpred
