// relpred: staged relation-prediction pipeline over a typed weighted graph.
//
//   relpred synth --out data/                       # planted benchmark
//   relpred run --nodes data/nodes.tsv --edges data/edges.tsv --workdir w/
//   relpred query --workdir w/ c0_specific3 c0_generic1
//
// Every option can also be given in a key = value file via --config; flags
// on the command line win over the file.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "relpred/error.hpp"
#include "relpred/pipeline.hpp"
#include "relpred/simd/kernels.hpp"
#include "relpred/synthetic.hpp"
#include "relpred/text_io.hpp"

namespace {

using relpred::ErrorKind;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;
constexpr int kExitData = 4;

std::optional<std::size_t> parse_limit(const std::string& text, const char* name) {
  if (text == "unlimited" || text == "none") return std::nullopt;
  const auto v = relpred::parse_int(text);
  if (!v || *v < 1) relpred::fail(ErrorKind::kConfigError, std::string(name) + " must be a positive integer or 'unlimited'");
  return static_cast<std::size_t>(*v);
}

struct CliOptions {
  relpred::PipelineConfig cfg;
  bool directed = false;
  bool no_bootstrap = false;
  std::string stratify_on = "r_syn";
  std::string class_weight = "none";
  std::string max_depth = "unlimited";
  std::string max_leaf_nodes = "unlimited";
  std::string max_features = "sqrt";
  std::string report_format = "text";
  std::string simd;
  std::string alias_mode = "auto";

  void apply() {
    auto& c = cfg;
    c.walk.directedness = directed ? relpred::Directedness::kDirected : relpred::Directedness::kUndirected;
    if (alias_mode == "auto") c.walk.alias_mode = relpred::AliasMode::kAuto;
    else if (alias_mode == "precompute") c.walk.alias_mode = relpred::AliasMode::kPrecompute;
    else if (alias_mode == "on-the-fly") c.walk.alias_mode = relpred::AliasMode::kOnTheFly;
    else relpred::fail(ErrorKind::kConfigError, "alias-mode must be auto, precompute or on-the-fly");

    c.forest.bootstrap = !no_bootstrap;
    if (stratify_on == "none") {
      c.split.stratify_on.reset();
    } else {
      const auto rel = relpred::RelationType::parse(stratify_on);
      if (!relpred::is_predictable(rel)) relpred::fail(ErrorKind::kConfigError, "stratify-on must be a label relation or none");
      c.split.stratify_on = rel.code;
    }
    if (class_weight == "none") c.forest.class_weight = relpred::ClassWeight::kNone;
    else if (class_weight == "balanced") c.forest.class_weight = relpred::ClassWeight::kBalanced;
    else relpred::fail(ErrorKind::kConfigError, "class-weight must be none or balanced");
    c.forest.tree.max_depth = parse_limit(max_depth, "max-depth");
    c.forest.tree.max_leaf_nodes = parse_limit(max_leaf_nodes, "max-leaf-nodes");
    if (max_features == "sqrt") {
      c.forest.tree.max_features = relpred::MaxFeatures::kSqrt;
    } else if (max_features == "all") {
      c.forest.tree.max_features = relpred::MaxFeatures::kAll;
    } else {
      c.forest.tree.max_features = relpred::MaxFeatures::kFixed;
      const auto n = parse_limit(max_features, "max-features");
      if (!n) relpred::fail(ErrorKind::kConfigError, "max-features must be sqrt, all or a positive integer");
      c.forest.tree.max_features_fixed = *n;
    }
    if (report_format == "text") c.report_format = relpred::ReportFormat::kText;
    else if (report_format == "csv") c.report_format = relpred::ReportFormat::kCsv;
    else if (report_format == "json") c.report_format = relpred::ReportFormat::kJson;
    else relpred::fail(ErrorKind::kConfigError, "report-format must be text, csv or json");

    if (!simd.empty()) {
      bool found = false;
      for (auto isa : {relpred::simd::Isa::kScalar, relpred::simd::Isa::kAvx2, relpred::simd::Isa::kNeon}) {
        if (simd == relpred::simd::to_string(isa)) {
          if (!relpred::simd::supported(isa)) relpred::fail(ErrorKind::kConfigError, simd + " is not supported on this CPU");
          relpred::simd::set_active(isa);
          found = true;
        }
      }
      if (!found) relpred::fail(ErrorKind::kConfigError, "simd must be scalar, avx2 or neon");
    }
    c.finalize();
  }
};

void add_pipeline_options(CLI::App& app, CliOptions& o) {
  auto& c = o.cfg;
  app.add_option("--nodes", c.nodes_file, "Nodes TSV (name, type, weight)");
  app.add_option("--edges", c.edges_file, "Edges TSV (src, rel, dst, weight)");
  app.add_option("--workdir", c.workdir, "Directory holding stage artifacts")->capture_default_str();
  app.add_option("--seed", c.seed, "Global seed; every stage seed derives from it")->capture_default_str();
  app.add_option("--workers", c.workers, "Worker threads; 1 is the deterministic mode")->capture_default_str();
  app.add_option("--simd", o.simd, "Force a kernel variant: scalar, avx2, neon");

  app.add_option("--min-edge-weight", c.subgraph.min_edge_weight, "Subgraph edge weight floor (inclusive)")
      ->capture_default_str();

  app.add_option("--walk-length", c.walk.walk_length)->capture_default_str();
  app.add_option("--walks-per-source", c.walk.walks_per_source)->capture_default_str();
  app.add_option("--p", c.walk.return_param, "Return parameter")->capture_default_str();
  app.add_option("--q", c.walk.inout_param, "In-out parameter")->capture_default_str();
  app.add_flag("--directed", o.directed, "Walk edges in their stored direction only");
  app.add_option("--alias-mode", o.alias_mode, "auto, precompute or on-the-fly")->capture_default_str();

  app.add_option("--dim", c.sgns.dim, "Embedding dimension")->capture_default_str();
  app.add_option("--window", c.sgns.window)->capture_default_str();
  app.add_option("--negatives", c.sgns.negatives)->capture_default_str();
  app.add_option("--epochs", c.sgns.epochs)->capture_default_str();
  app.add_option("--lr", c.sgns.initial_lr)->capture_default_str();
  app.add_option("--min-lr", c.sgns.min_lr)->capture_default_str();
  app.add_option("--noise-exponent", c.sgns.noise_exponent)->capture_default_str();

  app.add_option("--min-label-weight", c.dataset.min_label_weight, "Label edge weight floor (exclusive)")
      ->capture_default_str();
  app.add_option("--unconnected-ratio", c.dataset.unconnected_ratio)->capture_default_str();
  app.add_option("--test-fraction", c.split.test_fraction)->capture_default_str();
  app.add_option("--stratify-on", o.stratify_on, "Label relation to stratify the split on, or none")
      ->capture_default_str();

  app.add_option("--n-estimators", c.forest.n_estimators)->capture_default_str();
  app.add_flag("--no-bootstrap", o.no_bootstrap);
  app.add_option("--class-weight", o.class_weight, "none or balanced")->capture_default_str();
  app.add_option("--max-depth", o.max_depth)->capture_default_str();
  app.add_option("--max-leaf-nodes", o.max_leaf_nodes)->capture_default_str();
  app.add_option("--max-features", o.max_features, "sqrt, all or a count")->capture_default_str();
  app.add_option("--min-samples-split", c.forest.tree.min_samples_split)->capture_default_str();
  app.add_option("--min-samples-leaf", c.forest.tree.min_samples_leaf)->capture_default_str();
  app.add_option("--sweep-grid", c.sweep_grid, "n_estimators values to sweep")->delimiter(',');
  app.add_option("--report-format", o.report_format, "text, csv or json")->capture_default_str();
}

void print_report(const relpred::MetricsReport& report, relpred::ReportFormat format) {
  std::cout << relpred::render_report(report, format);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation prediction over a typed weighted lexical-semantic graph"};
  app.set_config("--config", "", "key = value file with option defaults");
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opts;
  add_pipeline_options(app, opts);

  relpred::SyntheticSpec synth = relpred::SyntheticSpec::defaults();
  std::string synth_out = "synthetic";
  auto* cmd_synth = app.add_subcommand("synth", "Generate the planted-relation benchmark graph");
  cmd_synth->add_option("--out", synth_out, "Output directory")->capture_default_str();
  cmd_synth->add_option("--communities", synth.n_communities)->capture_default_str();
  cmd_synth->add_option("--nodes-per-community", synth.nodes_per_community)->capture_default_str();
  cmd_synth->add_option("--noise", synth.noise_rate)->capture_default_str();

  auto* cmd_ingest = app.add_subcommand("ingest", "Validate and import the graph files");
  auto* cmd_subgraph = app.add_subcommand("subgraph", "Select node/relation types above the weight floor");
  auto* cmd_walk = app.add_subcommand("walk", "Generate biased random walks");
  auto* cmd_embed = app.add_subcommand("embed", "Train skip-gram embeddings on the walks");
  auto* cmd_dataset = app.add_subcommand("dataset", "Build and split the labelled pair dataset");
  auto* cmd_train = app.add_subcommand("train", "Fit one random forest per relation");
  auto* cmd_eval = app.add_subcommand("eval", "Score the forests on the test split");
  auto* cmd_sweep = app.add_subcommand("sweep", "Validation accuracy across n_estimators values");
  auto* cmd_run = app.add_subcommand("run", "ingest, subgraph, walk, embed, dataset, train, eval");

  std::string query_source;
  std::string query_target;
  auto* cmd_query = app.add_subcommand("query", "Relation probabilities for an ordered pair");
  cmd_query->add_option("source", query_source)->required();
  cmd_query->add_option("target", query_target)->required();

  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::size_t top_n = 10;
  auto* cmd_similar = app.add_subcommand("similar", "Nearest neighbours / analogies in embedding space");
  cmd_similar->add_option("--positive", positive)->required();
  cmd_similar->add_option("--negative", negative);
  cmd_similar->add_option("--top", top_n)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    opts.apply();
    const auto& cfg = opts.cfg;
    if (cmd_synth->parsed()) {
      synth.seed = cfg.seed;
      const auto s = relpred::generate_synthetic(synth);
      relpred::write_synthetic(s, synth_out);
      std::cout << "wrote " << s.graph.node_count() << " nodes, " << s.graph.edge_count() << " edges to " << synth_out
                << "\n";
    } else if (cmd_ingest->parsed()) {
      const auto r = relpred::run_ingest(cfg);
      std::cout << "nodes accepted " << r.nodes_accepted << " rejected " << r.nodes_rejected << "\nedges accepted "
                << r.edges_accepted << " rejected " << r.edges_rejected << "\n";
    } else if (cmd_subgraph->parsed()) {
      relpred::run_subgraph(cfg);
    } else if (cmd_walk->parsed()) {
      relpred::run_walk(cfg);
    } else if (cmd_embed->parsed()) {
      const auto stats = relpred::run_embed(cfg);
      for (std::size_t i = 0; i < stats.epoch_mean_loss.size(); ++i) {
        std::printf("epoch %zu mean loss %.6f\n", i + 1, stats.epoch_mean_loss[i]);
      }
    } else if (cmd_dataset->parsed()) {
      relpred::run_dataset(cfg);
    } else if (cmd_train->parsed()) {
      relpred::run_train(cfg);
    } else if (cmd_eval->parsed()) {
      print_report(relpred::run_eval(cfg), cfg.report_format);
    } else if (cmd_sweep->parsed()) {
      const auto r = relpred::run_sweep(cfg);
      std::cout << relpred::read_file(relpred::Artifacts(cfg.workdir).sweep);
      (void)r;
    } else if (cmd_run->parsed()) {
      print_report(relpred::run_all(cfg), cfg.report_format);
    } else if (cmd_query->parsed()) {
      for (const auto& [rel, p] : relpred::run_query(cfg, query_source, query_target)) {
        std::printf("%s\t%.6f\n", relpred::RelationType(rel).str().c_str(), p);
      }
    } else if (cmd_similar->parsed()) {
      const auto e = relpred::read_embeddings(relpred::Artifacts(cfg.workdir).embeddings);
      for (const auto& [name, score] : relpred::analogy_query(e, positive, negative, top_n)) {
        std::printf("%s\t%.6f\n", name.c_str(), score);
      }
    }
  } catch (const relpred::Error& e) {
    std::cerr << "relpred: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kConfigError: return kExitConfig;
      case ErrorKind::kMissingArtifact: return kExitMissing;
      default: return kExitData;
    }
  } catch (const std::exception& e) {
    std::cerr << "relpred: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
