#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relpred {

using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { kTerm, kForm, kOther };

// n_term / n_form, or any other type string kept verbatim.
struct NodeType {
  NodeKind kind = NodeKind::kTerm;
  std::string other;

  static NodeType term() { return {NodeKind::kTerm, {}}; }
  static NodeType form() { return {NodeKind::kForm, {}}; }
  static NodeType parse(std::string_view text);
  std::string str() const;

  auto operator<=>(const NodeType&) const = default;
};

enum class RelationCode : std::uint8_t { kRaffSem, kSyn, kIsa, kHypo, kLieu, kAgent, kAgentInv, kOther };

struct RelationType {
  RelationCode code = RelationCode::kOther;
  std::string other;

  RelationType() = default;
  RelationType(RelationCode c) : code(c) {}  // NOLINT(google-explicit-constructor)
  RelationType(RelationCode c, std::string o) : code(c), other(std::move(o)) {}

  static RelationType parse(std::string_view text);
  std::string str() const;

  auto operator<=>(const RelationType&) const = default;
};

// The six relations that get a label column, in report/column order.
inline constexpr std::array<RelationCode, 6> kLabelOrder = {
    RelationCode::kSyn, RelationCode::kIsa, RelationCode::kHypo,
    RelationCode::kLieu, RelationCode::kAgentInv, RelationCode::kAgent,
};

bool is_predictable(const RelationType& rel);
// Index into kLabelOrder, or nullopt for non-label relations.
std::optional<std::size_t> label_index(const RelationType& rel);

struct Node {
  NodeId id = 0;
  std::string name;
  NodeType type;
  double weight = 0.0;
};

struct Edge {
  NodeId src = 0;
  RelationType rel;
  NodeId dst = 0;
  double weight = 0.0;
};

enum class Direction { kOut, kIn, kBoth };

// Immutable multi-relational weighted graph. Edges are stored grouped by
// source, then sorted by (relation, destination); every (src, rel, dst)
// triple appears once.
class TypedGraph {
 public:
  TypedGraph() = default;

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(NodeId id) const;
  std::span<const Edge> edges() const { return edges_; }

  std::span<const Edge> out_edges(NodeId src) const;
  std::span<const Edge> out_edges(NodeId src, const RelationType& rel) const;
  const Edge* find_edge(NodeId src, const RelationType& rel, NodeId dst) const;
  std::size_t in_degree(NodeId id) const;

  std::optional<NodeId> find(std::string_view name) const;

 private:
  friend class GraphBuilder;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;  // node_count + 1 entries into edges_
  std::vector<std::size_t> in_degree_;
  std::unordered_map<std::string, NodeId> name_index_;
};

class GraphBuilder {
 public:
  // Throws kInvalidArgument on empty name, negative weight, or a name that
  // is already present.
  NodeId add_node(std::string name, NodeType type, double weight);
  std::optional<NodeId> find(std::string_view name) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Duplicate (src, rel, dst) triples keep the maximum weight.
  void add_edge(NodeId src, RelationType rel, NodeId dst, double weight);

  TypedGraph build() &&;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, NodeId> name_index_;
};

std::size_t degree(const TypedGraph& g, NodeId node, Direction direction);

struct IngestIssue {
  enum class Kind { kMalformedRecord, kDanglingEdge };
  Kind kind;
  std::string file;
  std::size_t line;  // 1-based
  std::string reason;
};

struct IngestReport {
  std::size_t nodes_accepted = 0;
  std::size_t nodes_rejected = 0;
  std::size_t edges_accepted = 0;
  std::size_t edges_rejected = 0;
  std::vector<IngestIssue> issues;
};

struct IngestResult {
  TypedGraph graph;
  IngestReport report;
};

// Malformed records are collected; if more than 10% of the record lines of
// either file are malformed, throws kFormatError. Dangling edges are
// rejected and reported but never fatal.
IngestResult ingest_graph(const std::filesystem::path& nodes_file, const std::filesystem::path& edges_file);
IngestResult ingest_graph_text(std::string_view nodes_text, std::string_view edges_text);

std::string serialize_nodes(const TypedGraph& g);
std::string serialize_edges(const TypedGraph& g);
void write_graph(const TypedGraph& g, const std::filesystem::path& nodes_file, const std::filesystem::path& edges_file);

std::uint64_t fingerprint(const TypedGraph& g);

struct SubgraphFilter {
  std::vector<NodeType> node_types;
  std::vector<RelationType> rel_types;
  double min_edge_weight = 60.0;  // inclusive

  // n_term/n_form nodes, the seven lexical-semantic relations, weight >= 60.
  static SubgraphFilter defaults();
};

TypedGraph select_subgraph(const TypedGraph& g, const SubgraphFilter& filter);

}  // namespace relpred
