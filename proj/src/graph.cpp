#include "relpred/graph.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "relpred/error.hpp"
#include "relpred/random.hpp"
#include "relpred/text_io.hpp"

namespace relpred {
namespace {

struct RelationName {
  RelationCode code;
  std::string_view name;
};

constexpr std::array<RelationName, 7> kRelationNames = {{
    {RelationCode::kRaffSem, "r_raff_sem"},
    {RelationCode::kSyn, "r_syn"},
    {RelationCode::kIsa, "r_isa"},
    {RelationCode::kHypo, "r_hypo"},
    {RelationCode::kLieu, "r_lieu"},
    {RelationCode::kAgent, "r_agent"},
    {RelationCode::kAgentInv, "r_agent-1"},
}};

bool edge_key_less(const Edge& a, const Edge& b) {
  return std::tie(a.src, a.rel, a.dst) < std::tie(b.src, b.rel, b.dst);
}

bool same_key(const Edge& a, const Edge& b) { return a.src == b.src && a.dst == b.dst && a.rel == b.rel; }

}  // namespace

NodeType NodeType::parse(std::string_view text) {
  if (text == "n_term") return term();
  if (text == "n_form") return form();
  return {NodeKind::kOther, std::string(text)};
}

std::string NodeType::str() const {
  switch (kind) {
    case NodeKind::kTerm: return "n_term";
    case NodeKind::kForm: return "n_form";
    case NodeKind::kOther: return other;
  }
  return other;
}

RelationType RelationType::parse(std::string_view text) {
  for (const auto& [code, name] : kRelationNames) {
    if (text == name) return {code};
  }
  return {RelationCode::kOther, std::string(text)};
}

std::string RelationType::str() const {
  for (const auto& [c, name] : kRelationNames) {
    if (c == code) return std::string(name);
  }
  return other;
}

bool is_predictable(const RelationType& rel) { return label_index(rel).has_value(); }

std::optional<std::size_t> label_index(const RelationType& rel) {
  if (rel.code == RelationCode::kOther) return std::nullopt;
  for (std::size_t i = 0; i < kLabelOrder.size(); ++i) {
    if (kLabelOrder[i] == rel.code) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// TypedGraph

const Node& TypedGraph::node(NodeId id) const {
  if (id >= nodes_.size()) fail(ErrorKind::kUnknownNode, "node id " + std::to_string(id));
  return nodes_[id];
}

std::span<const Edge> TypedGraph::out_edges(NodeId src) const {
  if (src >= nodes_.size()) fail(ErrorKind::kUnknownNode, "node id " + std::to_string(src));
  return std::span<const Edge>(edges_).subspan(offsets_[src], offsets_[src + 1] - offsets_[src]);
}

std::span<const Edge> TypedGraph::out_edges(NodeId src, const RelationType& rel) const {
  const auto all = out_edges(src);
  const auto lo = std::partition_point(all.begin(), all.end(), [&](const Edge& e) { return e.rel < rel; });
  const auto hi = std::partition_point(lo, all.end(), [&](const Edge& e) { return e.rel == rel; });
  return {lo, hi};
}

const Edge* TypedGraph::find_edge(NodeId src, const RelationType& rel, NodeId dst) const {
  const auto run = out_edges(src, rel);
  const auto it = std::partition_point(run.begin(), run.end(), [&](const Edge& e) { return e.dst < dst; });
  return (it != run.end() && it->dst == dst) ? &*it : nullptr;
}

std::size_t TypedGraph::in_degree(NodeId id) const {
  if (id >= nodes_.size()) fail(ErrorKind::kUnknownNode, "node id " + std::to_string(id));
  return in_degree_[id];
}

std::optional<NodeId> TypedGraph::find(std::string_view name) const {
  const auto it = name_index_.find(std::string(name));
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// GraphBuilder

NodeId GraphBuilder::add_node(std::string name, NodeType type, double weight) {
  if (name.empty()) fail(ErrorKind::kInvalidArgument, "empty node name");
  if (!(weight >= 0.0) || !std::isfinite(weight)) fail(ErrorKind::kInvalidArgument, "node weight must be finite and >= 0");
  if (name_index_.contains(name)) fail(ErrorKind::kInvalidArgument, "duplicate node name '" + name + "'");
  const auto id = static_cast<NodeId>(nodes_.size());
  name_index_.emplace(name, id);
  nodes_.push_back({id, std::move(name), std::move(type), weight});
  return id;
}

std::optional<NodeId> GraphBuilder::find(std::string_view name) const {
  const auto it = name_index_.find(std::string(name));
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

void GraphBuilder::add_edge(NodeId src, RelationType rel, NodeId dst, double weight) {
  if (src >= nodes_.size() || dst >= nodes_.size()) fail(ErrorKind::kUnknownNode, "edge endpoint out of range");
  if (!std::isfinite(weight)) fail(ErrorKind::kInvalidArgument, "edge weight must be finite");
  edges_.push_back({src, std::move(rel), dst, weight});
}

TypedGraph GraphBuilder::build() && {
  std::stable_sort(edges_.begin(), edges_.end(), edge_key_less);
  std::vector<Edge> merged;
  merged.reserve(edges_.size());
  for (auto& e : edges_) {
    if (!merged.empty() && same_key(merged.back(), e)) {
      merged.back().weight = std::max(merged.back().weight, e.weight);
    } else {
      merged.push_back(std::move(e));
    }
  }

  TypedGraph g;
  g.offsets_.assign(nodes_.size() + 1, 0);
  g.in_degree_.assign(nodes_.size(), 0);
  for (const auto& e : merged) {
    ++g.offsets_[e.src + 1];
    ++g.in_degree_[e.dst];
  }
  for (std::size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];
  g.nodes_ = std::move(nodes_);
  g.edges_ = std::move(merged);
  g.name_index_ = std::move(name_index_);
  nodes_.clear();
  edges_.clear();
  name_index_.clear();
  return g;
}

std::size_t degree(const TypedGraph& g, NodeId node, Direction direction) {
  switch (direction) {
    case Direction::kOut: return g.out_edges(node).size();
    case Direction::kIn: return g.in_degree(node);
    case Direction::kBoth: return g.out_edges(node).size() + g.in_degree(node);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

struct LineCursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  bool next(std::string_view& line) {
    if (pos >= text.size()) return false;
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return true;
  }
};

bool is_skippable(std::string_view line) { return line.empty() || line.front() == '#'; }

void check_malformed_ratio(std::size_t malformed, std::size_t records, const std::string& file) {
  if (records > 0 && malformed * 10 > records) {
    fail(ErrorKind::kFormatError, file + ": " + std::to_string(malformed) + " of " + std::to_string(records) +
                                      " records malformed (limit 10%)");
  }
}

}  // namespace

IngestResult ingest_graph_text(std::string_view nodes_text, std::string_view edges_text) {
  GraphBuilder builder;
  IngestReport report;

  {
    LineCursor cur{nodes_text};
    std::string_view line;
    std::size_t records = 0;
    std::size_t malformed = 0;
    auto reject = [&](std::string reason) {
      ++malformed;
      ++report.nodes_rejected;
      report.issues.push_back({IngestIssue::Kind::kMalformedRecord, "nodes", cur.line_no, std::move(reason)});
    };
    while (cur.next(line)) {
      if (is_skippable(line)) continue;
      ++records;
      const auto fields = split(line, '\t');
      if (fields.size() != 3) {
        reject("expected 3 tab-separated fields, got " + std::to_string(fields.size()));
        continue;
      }
      const auto weight = parse_double(fields[2]);
      if (fields[0].empty()) {
        reject("empty node name");
      } else if (fields[1].empty()) {
        reject("empty node type");
      } else if (!weight || !std::isfinite(*weight) || *weight < 0) {
        reject("node weight must be a finite non-negative number");
      } else if (builder.find(fields[0])) {
        reject("duplicate node name '" + std::string(fields[0]) + "'");
      } else {
        builder.add_node(std::string(fields[0]), NodeType::parse(fields[1]), *weight);
        ++report.nodes_accepted;
      }
    }
    check_malformed_ratio(malformed, records, "nodes");
  }

  {
    LineCursor cur{edges_text};
    std::string_view line;
    std::size_t records = 0;
    std::size_t malformed = 0;
    while (cur.next(line)) {
      if (is_skippable(line)) continue;
      ++records;
      const auto fields = split(line, '\t');
      std::string reason;
      std::optional<double> weight;
      if (fields.size() != 4) {
        reason = "expected 4 tab-separated fields, got " + std::to_string(fields.size());
      } else if (fields[1].empty()) {
        reason = "empty relation type";
      } else if (weight = parse_double(fields[3]); !weight || !std::isfinite(*weight)) {
        reason = "edge weight is not a finite number";
      }
      if (!reason.empty()) {
        ++malformed;
        ++report.edges_rejected;
        report.issues.push_back({IngestIssue::Kind::kMalformedRecord, "edges", cur.line_no, std::move(reason)});
        continue;
      }
      const auto src = builder.find(fields[0]);
      const auto dst = builder.find(fields[2]);
      if (!src || !dst) {
        ++report.edges_rejected;
        report.issues.push_back({IngestIssue::Kind::kDanglingEdge, "edges", cur.line_no,
                                 "unknown node '" + std::string(!src ? fields[0] : fields[2]) + "'"});
        continue;
      }
      builder.add_edge(*src, RelationType::parse(fields[1]), *dst, *weight);
      ++report.edges_accepted;
    }
    check_malformed_ratio(malformed, records, "edges");
  }

  return {std::move(builder).build(), std::move(report)};
}

IngestResult ingest_graph(const std::filesystem::path& nodes_file, const std::filesystem::path& edges_file) {
  if (!std::filesystem::exists(nodes_file)) fail(ErrorKind::kMissingArtifact, nodes_file.string());
  if (!std::filesystem::exists(edges_file)) fail(ErrorKind::kMissingArtifact, edges_file.string());
  return ingest_graph_text(read_file(nodes_file), read_file(edges_file));
}

std::string serialize_nodes(const TypedGraph& g) {
  std::string out;
  for (const auto& n : g.nodes()) {
    out += n.name;
    out += '\t';
    out += n.type.str();
    out += '\t';
    out += format_double(n.weight);
    out += '\n';
  }
  return out;
}

std::string serialize_edges(const TypedGraph& g) {
  std::string out;
  for (const auto& e : g.edges()) {
    out += g.node(e.src).name;
    out += '\t';
    out += e.rel.str();
    out += '\t';
    out += g.node(e.dst).name;
    out += '\t';
    out += format_double(e.weight);
    out += '\n';
  }
  return out;
}

void write_graph(const TypedGraph& g, const std::filesystem::path& nodes_file,
                 const std::filesystem::path& edges_file) {
  write_file(nodes_file, serialize_nodes(g));
  write_file(edges_file, serialize_edges(g));
}

std::uint64_t fingerprint(const TypedGraph& g) {
  return fnv1a64(serialize_edges(g), fnv1a64(serialize_nodes(g)));
}

// ---------------------------------------------------------------------------
// Subgraph selection

SubgraphFilter SubgraphFilter::defaults() {
  SubgraphFilter f;
  f.node_types = {NodeType::term(), NodeType::form()};
  f.rel_types = {RelationCode::kRaffSem, RelationCode::kSyn,   RelationCode::kIsa,     RelationCode::kHypo,
                 RelationCode::kLieu,    RelationCode::kAgent, RelationCode::kAgentInv};
  f.min_edge_weight = 60.0;
  return f;
}

TypedGraph select_subgraph(const TypedGraph& g, const SubgraphFilter& filter) {
  if (!(filter.min_edge_weight >= 0.0)) fail(ErrorKind::kInvalidArgument, "min_edge_weight must be >= 0");
  auto contains = [](const auto& set, const auto& v) { return std::find(set.begin(), set.end(), v) != set.end(); };

  std::vector<bool> node_ok(g.node_count());
  for (const auto& n : g.nodes()) node_ok[n.id] = contains(filter.node_types, n.type);

  std::vector<const Edge*> kept;
  std::vector<bool> used(g.node_count(), false);
  for (const auto& e : g.edges()) {
    if (e.weight >= filter.min_edge_weight && node_ok[e.src] && node_ok[e.dst] && contains(filter.rel_types, e.rel)) {
      kept.push_back(&e);
      used[e.src] = true;
      used[e.dst] = true;
    }
  }

  GraphBuilder builder;
  std::vector<NodeId> remap(g.node_count(), 0);
  for (const auto& n : g.nodes()) {
    if (used[n.id]) remap[n.id] = builder.add_node(n.name, n.type, n.weight);
  }
  for (const Edge* e : kept) builder.add_edge(remap[e->src], e->rel, remap[e->dst], e->weight);
  return std::move(builder).build();
}

}  // namespace relpred
