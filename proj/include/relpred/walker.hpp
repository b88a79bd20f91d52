#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relpred/alias.hpp"
#include "relpred/graph.hpp"

namespace relpred {

enum class Directedness { kDirected, kUndirected };

// kAuto precomputes per-edge alias tables when they fit in
// alias_memory_limit bytes, and falls back to per-step construction
// otherwise. Both paths draw identical walks for the same seed.
enum class AliasMode { kAuto, kPrecompute, kOnTheFly };

struct WalkConfig {
  std::size_t walk_length = 80;
  std::size_t walks_per_source = 1;
  double return_param = 1.0;  // p
  double inout_param = 1.0;   // q
  Directedness directedness = Directedness::kUndirected;
  std::uint64_t seed = 0;
  AliasMode alias_mode = AliasMode::kAuto;
  std::size_t alias_memory_limit = std::size_t{512} << 20;
  std::size_t workers = 1;

  // Throws kInvalidArgument: walk_length >= 2, walks_per_source >= 1, p > 0, q > 0.
  void validate() const;
};

// Single-weight adjacency used for walking: parallel edges of different
// relation types are summed, and in undirected mode each edge also
// contributes its weight in the reverse direction. Neighbors are sorted by id.
class WalkGraph {
 public:
  static WalkGraph from(const TypedGraph& g, Directedness directedness);

  std::size_t node_count() const { return active_.size(); }
  std::span<const NodeId> neighbors(NodeId u) const {
    return std::span<const NodeId>(targets_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
  }
  std::span<const double> weights(NodeId u) const {
    return std::span<const double>(weights_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
  }
  std::size_t edge_offset(NodeId u) const { return offsets_[u]; }
  std::size_t edge_count() const { return targets_.size(); }
  bool has_edge(NodeId u, NodeId v) const;
  // True if the node touches at least one edge in either direction.
  bool active(NodeId u) const { return active_[u]; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
  std::vector<double> weights_;
  std::vector<bool> active_;
};

struct Transition {
  NodeId next;
  double weight;  // unnormalized
};

// node2vec transition weights out of `cur` given the previous node: w/p
// back to prev, w for neighbors of prev, w/q otherwise. With no previous
// node the raw edge weights are returned. Throws kNoNeighbors.
std::vector<Transition> second_order_weights(const WalkGraph& wg, std::optional<NodeId> prev, NodeId cur,
                                             const WalkConfig& cfg);
std::vector<Transition> second_order_weights(const TypedGraph& g, std::optional<NodeId> prev, NodeId cur,
                                             const WalkConfig& cfg);

struct WalkCorpus {
  std::vector<std::vector<NodeId>> walks;
  WalkConfig config;
  std::uint64_t graph_fingerprint = 0;
};

// One walk per (walk round, active node), ordered round-major then by
// start id. Walks stop early at nodes without successors. Each walk has its
// own RNG stream derived from (seed, start node, round), so the output does
// not depend on cfg.workers. Throws kEmptyGraph.
WalkCorpus generate_walks(const TypedGraph& g, const WalkConfig& cfg);

// One walk per line, node names escaped with escape_token, space-separated.
std::string serialize_walks(const WalkCorpus& corpus, const TypedGraph& g);
void write_walks(const WalkCorpus& corpus, const TypedGraph& g, const std::filesystem::path& path);
std::vector<std::vector<std::string>> parse_walks(std::string_view text);
std::vector<std::vector<std::string>> read_walks(const std::filesystem::path& path);

}  // namespace relpred
