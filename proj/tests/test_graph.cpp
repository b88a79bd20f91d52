#include <set>
#include <string>
#include <tuple>

#include "doctest.h"
#include "relpred/error.hpp"
#include "relpred/graph.hpp"
#include "relpred/random.hpp"
#include "relpred/text_io.hpp"
#include "support.hpp"

using namespace relpred;

namespace {

const char* kNodes =
    "# name\ttype\tweight\n"
    "chat\tn_term\t120\n"
    "animal\tn_term\t300\n"
    "chat::>felin\tn_form\t15\n";

const char* kEdges =
    "chat\tr_isa\tanimal\t95\n"
    "chat\tr_raff_sem\tchat::>felin\t70\n";

using Triple = std::tuple<std::string, std::string, std::string, double>;

std::set<Triple> triples(const TypedGraph& g) {
  std::set<Triple> out;
  for (const auto& e : g.edges()) out.insert({g.node(e.src).name, e.rel.str(), g.node(e.dst).name, e.weight});
  return out;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIoError;
}

}  // namespace

TEST_CASE("relation and node type strings round-trip") {
  for (const char* s : {"r_raff_sem", "r_syn", "r_isa", "r_hypo", "r_lieu", "r_agent", "r_agent-1", "r_pos"}) {
    CHECK(RelationType::parse(s).str() == s);
  }
  CHECK(RelationType::parse("r_pos").code == RelationCode::kOther);
  CHECK(RelationType::parse("r_agent-1").code == RelationCode::kAgentInv);
  CHECK(NodeType::parse("n_term") == NodeType::term());
  CHECK(NodeType::parse("n_form") == NodeType::form());
  CHECK(NodeType::parse("n_pos").str() == "n_pos");
}

TEST_CASE("exactly six relations are labels, raff_sem is not") {
  CHECK_FALSE(is_predictable(RelationCode::kRaffSem));
  CHECK_FALSE(is_predictable(RelationType::parse("r_pos")));
  std::size_t n = 0;
  for (auto code : {RelationCode::kRaffSem, RelationCode::kSyn, RelationCode::kIsa, RelationCode::kHypo,
                    RelationCode::kLieu, RelationCode::kAgent, RelationCode::kAgentInv}) {
    if (is_predictable(code)) ++n;
  }
  CHECK(n == 6);
  CHECK(label_index(RelationCode::kSyn) == 0u);
  CHECK(label_index(RelationCode::kAgentInv) == 4u);
  CHECK(label_index(RelationCode::kAgent) == 5u);
}

TEST_CASE("three nodes and two edges ingest as such") {
  const auto r = ingest_graph_text(kNodes, kEdges);
  CHECK(r.graph.node_count() == 3);
  CHECK(r.graph.edge_count() == 2);
  CHECK(r.report.nodes_accepted == 3);
  CHECK(r.report.edges_accepted == 2);
  CHECK(r.report.issues.empty());
  // Ids follow file order.
  CHECK(r.graph.find("chat") == NodeId{0});
  CHECK(r.graph.find("chat::>felin") == NodeId{2});
  CHECK(r.graph.node(1).weight == 300.0);
  CHECK(r.graph.node(2).type == NodeType::form());
}

TEST_CASE("an empty edges file is fine") {
  const auto r = ingest_graph_text(kNodes, "");
  CHECK(r.graph.node_count() == 3);
  CHECK(r.graph.edge_count() == 0);
}

TEST_CASE("dangling edges are rejected and reported, the rest ingested") {
  // Five edge lines, one naming a node that does not exist.
  const char* edges =
      "chat\tr_isa\tanimal\t95\n"
      "chat\tr_syn\tmatou\t88\n"
      "animal\tr_hypo\tchat\t95\n"
      "chat\tr_raff_sem\tchat::>felin\t70\n"
      "chat::>felin\tr_raff_sem\tchat\t61\n";
  const auto r = ingest_graph_text(kNodes, edges);
  CHECK(r.report.edges_accepted == 4);
  CHECK(r.report.edges_rejected == 1);
  REQUIRE(r.report.issues.size() == 1);
  CHECK(r.report.issues[0].kind == IngestIssue::Kind::kDanglingEdge);
  CHECK(r.report.issues[0].line == 2);
  CHECK(r.graph.edge_count() == 4);
}

TEST_CASE("a few malformed lines are collected, too many are fatal") {
  std::string nodes;
  for (int i = 0; i < 20; ++i) nodes += "n" + std::to_string(i) + "\tn_term\t1\n";
  nodes += "broken line without tabs\n";  // 1 of 21: tolerated
  const auto r = ingest_graph_text(nodes, "n0\tr_syn\tn1\tnot-a-number\nn0\tr_syn\tn1\t5\n"
                                          "n1\tr_syn\tn2\t5\nn2\tr_syn\tn3\t5\nn3\tr_syn\tn4\t5\n"
                                          "n4\tr_syn\tn5\t5\nn5\tr_syn\tn6\t5\nn6\tr_syn\tn7\t5\n"
                                          "n7\tr_syn\tn8\t5\nn8\tr_syn\tn9\t5\nn9\tr_syn\tn10\t5\n");
  CHECK(r.report.nodes_rejected == 1);
  CHECK(r.report.edges_rejected == 1);
  CHECK(r.graph.edge_count() == 10);
  CHECK(r.report.issues.front().kind == IngestIssue::Kind::kMalformedRecord);

  CHECK(kind_of([] { ingest_graph_text("a\tn_term\t1\nb\tn_term\t1\nbad\n", ""); }) == ErrorKind::kFormatError);
}

TEST_CASE("duplicate triples keep the maximum weight, distinct relations stay parallel") {
  const auto r = ingest_graph_text(kNodes,
                                   "chat\tr_isa\tanimal\t70\n"
                                   "chat\tr_isa\tanimal\t95\n"
                                   "chat\tr_isa\tanimal\t80\n"
                                   "chat\tr_syn\tanimal\t61\n");
  CHECK(r.graph.edge_count() == 2);
  const Edge* e = r.graph.find_edge(0, RelationCode::kIsa, 1);
  REQUIRE(e != nullptr);
  CHECK(e->weight == 95.0);
  CHECK(r.graph.out_edges(0, RelationCode::kSyn).size() == 1);
}

TEST_CASE("unknown relation strings are kept as OTHER") {
  const auto r = ingest_graph_text(kNodes, "chat\tr_pos\tanimal\t10\n");
  REQUIRE(r.graph.edge_count() == 1);
  CHECK(r.graph.edges()[0].rel == RelationType::parse("r_pos"));
}

TEST_CASE("degree counts") {
  GraphBuilder b;
  const NodeId a = b.add_node("a", NodeType::term(), 1);
  const NodeId x = b.add_node("x", NodeType::term(), 1);
  const NodeId y = b.add_node("y", NodeType::term(), 1);
  const NodeId lone = b.add_node("lone", NodeType::term(), 1);
  b.add_edge(a, RelationCode::kSyn, x, 1);
  b.add_edge(a, RelationCode::kIsa, y, 1);
  b.add_edge(y, RelationCode::kHypo, a, 1);
  const auto g = std::move(b).build();
  CHECK(degree(g, a, Direction::kOut) == 2);
  CHECK(degree(g, a, Direction::kIn) == 1);
  CHECK(degree(g, a, Direction::kBoth) == 3);
  CHECK(degree(g, lone, Direction::kBoth) == 0);
  CHECK(kind_of([&] { degree(g, 99, Direction::kOut); }) == ErrorKind::kUnknownNode);

  std::size_t out_sum = 0;
  std::size_t in_sum = 0;
  for (NodeId n = 0; n < g.node_count(); ++n) {
    out_sum += degree(g, n, Direction::kOut);
    in_sum += degree(g, n, Direction::kIn);
  }
  CHECK(out_sum == g.edge_count());
  CHECK(in_sum == g.edge_count());
}

TEST_CASE("builder rejects bad nodes") {
  GraphBuilder b;
  b.add_node("a", NodeType::term(), 0);
  CHECK(kind_of([&] { b.add_node("", NodeType::term(), 1); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { b.add_node("b", NodeType::term(), -1); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([&] { b.add_node("a", NodeType::term(), 1); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("subgraph weight threshold is inclusive") {
  const auto r = ingest_graph_text("a\tn_term\t1\nb\tn_term\t1\nc\tn_term\t1\n",
                                   "a\tr_syn\tb\t59\n"
                                   "b\tr_syn\tc\t60\n");
  const auto sub = select_subgraph(r.graph, SubgraphFilter::defaults());
  CHECK(sub.edge_count() == 1);
  // a only touched the dropped edge, so it goes too; ids are re-densified.
  CHECK(sub.node_count() == 2);
  CHECK(sub.node(0).name == "b");
  CHECK(sub.node(1).name == "c");
  CHECK(sub.edges()[0].weight == 60.0);
}

TEST_CASE("subgraph filters node and relation types") {
  const auto r = ingest_graph_text("a\tn_term\t1\nb\tn_form\t1\np\tn_pos\t1\n",
                                   "a\tr_raff_sem\tb\t70\n"
                                   "a\tr_pos\tp\t90\n"
                                   "b\tr_syn\tp\t90\n");
  const auto sub = select_subgraph(r.graph, SubgraphFilter::defaults());
  CHECK(sub.node_count() == 2);
  CHECK(sub.edge_count() == 1);
  CHECK(sub.edges()[0].rel == RelationType(RelationCode::kRaffSem));

  SubgraphFilter none = SubgraphFilter::defaults();
  none.min_edge_weight = 1000;
  const auto empty = select_subgraph(r.graph, none);
  CHECK(empty.node_count() == 0);
  CHECK(empty.edge_count() == 0);

  none.min_edge_weight = -1;
  CHECK(kind_of([&] { select_subgraph(r.graph, none); }) == ErrorKind::kInvalidArgument);
}

namespace {

TypedGraph random_graph(std::uint64_t seed, std::size_t n, std::size_t m) {
  Rng rng(seed);
  GraphBuilder b;
  const char* types[] = {"n_term", "n_form", "n_pos"};
  const char* rels[] = {"r_syn", "r_isa", "r_hypo", "r_lieu", "r_agent", "r_agent-1", "r_raff_sem", "r_pos"};
  for (std::size_t i = 0; i < n; ++i) {
    b.add_node("v" + std::to_string(i), NodeType::parse(types[rng.below(3)]), static_cast<double>(rng.below(100)));
  }
  for (std::size_t i = 0; i < m; ++i) {
    b.add_edge(static_cast<NodeId>(rng.below(n)), RelationType::parse(rels[rng.below(8)]),
               static_cast<NodeId>(rng.below(n)), static_cast<double>(rng.below(121)));
  }
  return std::move(b).build();
}

}  // namespace

TEST_CASE("subgraph selection is idempotent") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_graph(seed, 40, 150);
    const auto once = select_subgraph(g, SubgraphFilter::defaults());
    const auto twice = select_subgraph(once, SubgraphFilter::defaults());
    CHECK(serialize_nodes(once) == serialize_nodes(twice));
    CHECK(serialize_edges(once) == serialize_edges(twice));
  }
}

TEST_CASE("an all-accepting filter keeps every edge") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_graph(seed, 30, 100);
    SubgraphFilter all;
    all.node_types = {NodeType::term(), NodeType::form(), NodeType::parse("n_pos")};
    all.rel_types = {RelationCode::kRaffSem, RelationCode::kSyn, RelationCode::kIsa, RelationCode::kHypo,
                     RelationCode::kLieu, RelationCode::kAgent, RelationCode::kAgentInv,
                     RelationType::parse("r_pos")};
    all.min_edge_weight = 0;
    const auto sub = select_subgraph(g, all);
    CHECK(triples(sub) == triples(g));
  }
}

TEST_CASE("serialize then re-ingest preserves every triple") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_graph(seed, 30, 100);
    const auto back = ingest_graph_text(serialize_nodes(g), serialize_edges(g));
    CHECK(back.report.issues.empty());
    CHECK(triples(back.graph) == triples(g));
    CHECK(fingerprint(back.graph) == fingerprint(g));
    CHECK(serialize_nodes(back.graph) == serialize_nodes(g));
  }
}

TEST_CASE("graph files round-trip byte for byte") {
  testing::TempDir dir("graph");
  const auto g = ingest_graph_text(kNodes, kEdges).graph;
  write_graph(g, dir / "n.tsv", dir / "e.tsv");
  const auto back = ingest_graph(dir / "n.tsv", dir / "e.tsv");
  write_graph(back.graph, dir / "n2.tsv", dir / "e2.tsv");
  CHECK(read_file(dir / "n.tsv") == read_file(dir / "n2.tsv"));
  CHECK(read_file(dir / "e.tsv") == read_file(dir / "e2.tsv"));
  CHECK(kind_of([&] { ingest_graph(dir / "missing.tsv", dir / "e.tsv"); }) == ErrorKind::kMissingArtifact);
}
