#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "relpred/error.hpp"
#include "relpred/pipeline.hpp"
#include "relpred/synthetic.hpp"
#include "relpred/text_io.hpp"
#include "support.hpp"

using namespace relpred;

namespace {

PipelineConfig small_config(const testing::TempDir& dir) {
  auto spec = SyntheticSpec::defaults();
  spec.seed = 5;
  write_synthetic(generate_synthetic(spec), dir / "data");
  PipelineConfig cfg;
  cfg.nodes_file = dir / "data/nodes.tsv";
  cfg.edges_file = dir / "data/edges.tsv";
  cfg.workdir = dir / "work";
  cfg.forest.n_estimators = 20;
  cfg.sweep_grid = {5, 15};
  cfg.finalize();
  return cfg;
}

std::vector<nlohmann::json> manifest(const Artifacts& a) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_file(a.manifest));
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RELPRED_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("full pipeline writes every artifact and a chained manifest") {
  testing::TempDir dir("pipe");
  const auto cfg = small_config(dir);
  const auto report = run_all(cfg);
  const Artifacts a(cfg.workdir);
  for (auto code : kLabelOrder) CHECK(std::filesystem::exists(a.model(code)));
  CHECK(std::filesystem::exists(a.report_text));
  CHECK(report.per_relation.size() == 6);
  CHECK(report.macro.f1.has_value());

  const auto lines = manifest(a);
  REQUIRE(lines.size() == 7);
  const char* stages[] = {"ingest", "subgraph", "walk", "embed", "dataset", "train", "eval"};
  std::map<std::string, std::string> produced;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    CHECK(lines[i]["stage"] == stages[i]);
    CHECK(lines[i].contains("seed"));
    CHECK(lines[i].contains("duration_ms"));
    for (const auto& [name, hash] : lines[i]["inputs"].items()) {
      // Graph files come from outside; everything else must chain.
      if (i > 0) {
        REQUIRE(produced.contains(name));
        CHECK(produced[name] == hash.get<std::string>());
      }
    }
    for (const auto& [name, hash] : lines[i]["outputs"].items()) produced[name] = hash.get<std::string>();
  }

  // Every row has 2d features and six labels.
  const auto ds = read_dataset(a.dataset);
  CHECK(ds.feature_dim == 40);
  for (const auto& r : ds.rows) CHECK(r.features.size() == 40);

  SUBCASE("rerunning a stage reproduces its output") {
    const auto before = read_file(a.dataset);
    run_dataset(cfg);
    CHECK(read_file(a.dataset) == before);
    const auto model_before = read_file(a.model(RelationCode::kSyn));
    run_train(cfg);
    CHECK(read_file(a.model(RelationCode::kSyn)) == model_before);
  }

  SUBCASE("query on a training synonym pair") {
    const auto train = read_dataset(a.train);
    const DatasetRow* pick = nullptr;
    for (const auto& r : train.rows) {
      if (r.labels[0]) {
        pick = &r;
        break;
      }
    }
    REQUIRE(pick != nullptr);
    const auto probs = run_query(cfg, pick->source_name, pick->target_name);
    REQUIRE(probs.size() == 6);
    CHECK(probs[0].first == RelationCode::kSyn);
    CHECK(probs[0].second > 0.5);
    CHECK_THROWS_AS(run_query(cfg, "no such node", pick->target_name), Error);
  }

  SUBCASE("sweep") {
    const auto sweep = run_sweep(cfg);
    CHECK(sweep.grid == std::vector<std::size_t>{5, 15});
    CHECK(sweep.accuracy.size() == 6);
    CHECK(sweep.mean_accuracy.size() == 2);
    CHECK(std::filesystem::exists(a.sweep));
  }
}

TEST_CASE("a stage without its upstream artifact reports it") {
  testing::TempDir dir("pipe-missing");
  PipelineConfig cfg;
  cfg.workdir = dir / "work";
  cfg.finalize();
  try {
    run_embed(cfg);
    FAIL("expected MissingArtifact");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingArtifact);
  }
}

TEST_CASE("config validation is a config error") {
  PipelineConfig cfg;
  cfg.walk.walk_length = 1;
  try {
    cfg.finalize();
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfigError);
  }
}

TEST_CASE("stage seeds derive from the global seed") {
  PipelineConfig a;
  a.seed = 1;
  a.finalize();
  PipelineConfig b;
  b.seed = 2;
  b.finalize();
  CHECK(a.walk.seed != b.walk.seed);
  CHECK(a.sgns.seed != b.sgns.seed);
  CHECK(a.walk.seed != a.sgns.seed);
  CHECK(a.forest.seed != b.forest.seed);
}

TEST_CASE("cli exit codes and config file") {
  testing::TempDir dir("cli");
  const std::string d = dir.path().string();
  CHECK(run_cli("synth --out " + d + "/data --seed 9") == 0);
  CHECK(std::filesystem::exists(dir / "data/edges.tsv"));

  const std::string graph = " --nodes " + d + "/data/nodes.tsv --edges " + d + "/data/edges.tsv";
  CHECK(run_cli("eval --workdir " + d + "/w") == 3);
  CHECK(run_cli("walk --workdir " + d + "/w --walk-length 1") == 2);
  CHECK(run_cli("walk --no-such-flag") == 2);
  CHECK(run_cli("") == 2);

  {
    std::ofstream cfg(dir / "run.conf");
    cfg << "# shared settings\nworkdir = " << d << "/w\nn-estimators = 12\nwalk-length = 1\n";
  }
  // The file's bad walk length is overridden on the command line.
  CHECK(run_cli("run --config " + d + "/run.conf" + graph) == 2);
  CHECK(run_cli("run --config " + d + "/run.conf --walk-length 30 --report-format json" + graph) == 0);
  const auto model = read_file(dir / "w/models/r_syn.model");
  CHECK(model.find("n_estimators 12") != std::string::npos);
  CHECK(nlohmann::json::parse(read_file(dir / "w/report.json"))["relations"].size() == 6);
  CHECK(run_cli("query --workdir " + d + "/w c0_specific0 c0_specific1") == 0);
  CHECK(run_cli("query --workdir " + d + "/w nobody c0_specific1") == 4);
  CHECK(run_cli("similar --workdir " + d + "/w --positive c0_specific0 --top 3") == 0);

  {
    std::ofstream bad(dir / "bad_nodes.tsv");
    bad << "a\tn_term\nb\tn_term\t1\n";
  }
  CHECK(run_cli("ingest --workdir " + d + "/w2 --nodes " + d + "/bad_nodes.tsv --edges " + d + "/data/edges.tsv") ==
        4);
}
