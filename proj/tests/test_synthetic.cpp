#include <map>
#include <set>

#include "doctest.h"
#include "relpred/error.hpp"
#include "relpred/synthetic.hpp"
#include "relpred/text_io.hpp"
#include "support.hpp"

using namespace relpred;

TEST_CASE("default benchmark shape") {
  auto spec = SyntheticSpec::defaults();
  spec.seed = 1;
  const auto s = generate_synthetic(spec);
  CHECK(s.graph.node_count() == 4 * 50 + spec.distractor_nodes);
  std::map<std::size_t, std::size_t> per_community;
  for (std::size_t c : s.community) ++per_community[c];
  for (std::size_t c = 0; c < 4; ++c) CHECK(per_community[c] == 50);
  CHECK(s.truth.size() == s.graph.edge_count());
}

TEST_CASE("mirror relations come in pairs") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto spec = SyntheticSpec::defaults();
    spec.seed = seed;
    const auto s = generate_synthetic(spec);
    const auto& g = s.graph;
    std::size_t isa = 0;
    std::size_t hypo = 0;
    std::size_t agent = 0;
    std::size_t agent_inv = 0;
    for (const auto& e : g.edges()) {
      switch (e.rel.code) {
        case RelationCode::kIsa:
          ++isa;
          REQUIRE(g.find_edge(e.dst, RelationCode::kHypo, e.src) != nullptr);
          CHECK(g.find_edge(e.dst, RelationCode::kHypo, e.src)->weight == e.weight);
          break;
        case RelationCode::kHypo:
          ++hypo;
          CHECK(g.find_edge(e.dst, RelationCode::kIsa, e.src) != nullptr);
          break;
        case RelationCode::kAgent:
          ++agent;
          CHECK(g.find_edge(e.dst, RelationCode::kAgentInv, e.src) != nullptr);
          break;
        case RelationCode::kAgentInv: ++agent_inv; break;
        default: break;
      }
    }
    CHECK(isa == hypo);
    CHECK(agent == agent_inv);
    CHECK(isa > 0);
  }
}

TEST_CASE("without noise every synonym pair stays inside one community") {
  auto spec = SyntheticSpec::defaults();
  spec.noise_rate = 0.0;
  const auto s = generate_synthetic(spec);
  std::size_t syn = 0;
  for (const auto& e : s.truth) {
    CHECK_FALSE(e.noise);
    if (e.rel.code == RelationCode::kSyn) {
      ++syn;
      CHECK(s.community[e.src] == s.community[e.dst]);
    }
    if (e.rel.code != RelationCode::kOther) CHECK(satisfies_rule(s, e.rel, e.src, e.dst));
  }
  CHECK(syn > 0);
}

TEST_CASE("noise rate is honoured") {
  double total = 0.0;
  const int seeds = 10;
  for (int seed = 0; seed < seeds; ++seed) {
    auto spec = SyntheticSpec::defaults();
    spec.noise_rate = 0.1;
    spec.seed = static_cast<std::uint64_t>(seed);
    const auto s = generate_synthetic(spec);
    std::size_t rule_edges = 0;
    std::size_t violating = 0;
    for (const auto& e : s.truth) {
      if (e.rel.code == RelationCode::kOther) continue;
      ++rule_edges;
      const bool ok = satisfies_rule(s, e.rel, e.src, e.dst);
      CHECK(ok == !e.noise);
      violating += ok ? 0 : 1;
    }
    total += static_cast<double>(violating) / static_cast<double>(rule_edges);
  }
  CHECK(std::abs(total / seeds - 0.1) <= 0.02);
}

TEST_CASE("generation is deterministic and written in graph format") {
  auto spec = SyntheticSpec::defaults();
  spec.seed = 3;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  CHECK(serialize_edges(a.graph) == serialize_edges(b.graph));
  testing::TempDir dir("synth");
  write_synthetic(a, dir.path());
  const auto back = ingest_graph(dir / "nodes.tsv", dir / "edges.tsv");
  CHECK(back.report.issues.empty());
  CHECK(serialize_edges(back.graph) == serialize_edges(a.graph));
  CHECK(read_file(dir / "truth.tsv").find("\tnoise\n") != std::string::npos);
}

TEST_CASE("invalid specs are rejected") {
  auto spec = SyntheticSpec::defaults();
  spec.noise_rate = 1.0;
  CHECK_THROWS_AS(generate_synthetic(spec), Error);
  spec = SyntheticSpec::defaults();
  spec.nodes_per_community = 5;
  CHECK_THROWS_AS(generate_synthetic(spec), Error);
  spec = SyntheticSpec::defaults();
  spec.relation_rules[RelationCode::kHypo] = {{Role::kGeneric}, Role::kSpecific, 0, 1.0};
  CHECK_THROWS_AS(generate_synthetic(spec), Error);
}
