#include "relpred/walker.hpp"

#include <algorithm>
#include <map>

#include "relpred/error.hpp"
#include "relpred/parallel.hpp"
#include "relpred/text_io.hpp"

namespace relpred {

void WalkConfig::validate() const {
  if (walk_length < 2) fail(ErrorKind::kInvalidArgument, "walk_length must be >= 2");
  if (walks_per_source < 1) fail(ErrorKind::kInvalidArgument, "walks_per_source must be >= 1");
  if (!(return_param > 0.0)) fail(ErrorKind::kInvalidArgument, "return_param p must be > 0");
  if (!(inout_param > 0.0)) fail(ErrorKind::kInvalidArgument, "inout_param q must be > 0");
}

WalkGraph WalkGraph::from(const TypedGraph& g, Directedness directedness) {
  const std::size_t n = g.node_count();
  std::vector<std::map<NodeId, double>> adj(n);
  WalkGraph wg;
  wg.active_.assign(n, false);
  for (const auto& e : g.edges()) {
    wg.active_[e.src] = true;
    wg.active_[e.dst] = true;
    adj[e.src][e.dst] += e.weight;
    if (directedness == Directedness::kUndirected && e.src != e.dst) adj[e.dst][e.src] += e.weight;
  }
  wg.offsets_.assign(n + 1, 0);
  for (NodeId u = 0; u < n; ++u) {
    for (const auto& [v, w] : adj[u]) {
      // Non-positive totals cannot carry a transition probability.
      if (w > 0.0) {
        wg.targets_.push_back(v);
        wg.weights_.push_back(w);
      }
    }
    wg.offsets_[u + 1] = wg.targets_.size();
  }
  return wg;
}

bool WalkGraph::has_edge(NodeId u, NodeId v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Transition> second_order_weights(const WalkGraph& wg, std::optional<NodeId> prev, NodeId cur,
                                             const WalkConfig& cfg) {
  if (cur >= wg.node_count()) fail(ErrorKind::kUnknownNode, "node id " + std::to_string(cur));
  const auto nb = wg.neighbors(cur);
  const auto w = wg.weights(cur);
  if (nb.empty()) fail(ErrorKind::kNoNeighbors, "node id " + std::to_string(cur));
  std::vector<Transition> out(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    double weight = w[i];
    if (prev) {
      if (nb[i] == *prev) {
        weight = w[i] / cfg.return_param;
      } else if (!wg.has_edge(*prev, nb[i])) {
        weight = w[i] / cfg.inout_param;
      }
    }
    out[i] = {nb[i], weight};
  }
  return out;
}

std::vector<Transition> second_order_weights(const TypedGraph& g, std::optional<NodeId> prev, NodeId cur,
                                             const WalkConfig& cfg) {
  return second_order_weights(WalkGraph::from(g, cfg.directedness), prev, cur, cfg);
}

namespace {

AliasTable transition_table(const WalkGraph& wg, std::optional<NodeId> prev, NodeId cur, const WalkConfig& cfg) {
  const auto tr = second_order_weights(wg, prev, cur, cfg);
  std::vector<double> w(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) w[i] = tr[i].weight;
  return AliasTable::build(w);
}

// Alias tables for the first step out of each node and for every directed
// edge (prev -> cur), indexed by the edge's CSR offset.
struct TransitionCache {
  std::vector<AliasTable> first;
  std::vector<AliasTable> second;
};

std::size_t second_order_entries(const WalkGraph& wg) {
  std::size_t entries = 0;
  for (NodeId u = 0; u < wg.node_count(); ++u) {
    for (NodeId v : wg.neighbors(u)) entries += wg.neighbors(v).size();
  }
  return entries;
}

TransitionCache build_cache(const WalkGraph& wg, const WalkConfig& cfg) {
  TransitionCache cache;
  cache.first.resize(wg.node_count());
  cache.second.resize(wg.edge_count());
  parallel_for(wg.node_count(), cfg.workers, [&](std::size_t i) {
    const auto u = static_cast<NodeId>(i);
    if (wg.neighbors(u).empty()) return;
    cache.first[u] = transition_table(wg, std::nullopt, u, cfg);
    const auto nb = wg.neighbors(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (!wg.neighbors(nb[k]).empty()) cache.second[wg.edge_offset(u) + k] = transition_table(wg, u, nb[k], cfg);
    }
  });
  return cache;
}

std::vector<NodeId> walk_from(const WalkGraph& wg, const TransitionCache* cache, NodeId start, const WalkConfig& cfg,
                              Rng& rng) {
  std::vector<NodeId> walk;
  walk.reserve(cfg.walk_length);
  walk.push_back(start);
  std::optional<NodeId> prev;
  std::size_t in_edge = 0;  // CSR offset of (prev -> cur)
  while (walk.size() < cfg.walk_length) {
    const NodeId cur = walk.back();
    if (wg.neighbors(cur).empty()) break;
    std::uint32_t k = 0;
    if (cache) {
      k = (prev ? cache->second[in_edge] : cache->first[cur]).sample(rng);
    } else {
      k = transition_table(wg, prev, cur, cfg).sample(rng);
    }
    const NodeId next = wg.neighbors(cur)[k];
    in_edge = wg.edge_offset(cur) + k;
    prev = cur;
    walk.push_back(next);
  }
  return walk;
}

}  // namespace

WalkCorpus generate_walks(const TypedGraph& g, const WalkConfig& cfg) {
  cfg.validate();
  if (g.empty()) fail(ErrorKind::kEmptyGraph, "cannot walk an empty graph");
  const WalkGraph wg = WalkGraph::from(g, cfg.directedness);

  bool precompute = cfg.alias_mode == AliasMode::kPrecompute;
  if (cfg.alias_mode == AliasMode::kAuto) {
    const std::size_t bytes = second_order_entries(wg) * (sizeof(double) + sizeof(std::uint32_t));
    precompute = bytes <= cfg.alias_memory_limit;
  }
  std::optional<TransitionCache> cache;
  if (precompute) cache = build_cache(wg, cfg);

  std::vector<NodeId> starts;
  for (NodeId u = 0; u < wg.node_count(); ++u) {
    if (wg.active(u)) starts.push_back(u);
  }

  WalkCorpus corpus;
  corpus.config = cfg;
  corpus.graph_fingerprint = fingerprint(g);
  corpus.walks.resize(starts.size() * cfg.walks_per_source);
  parallel_for(corpus.walks.size(), cfg.workers, [&](std::size_t i) {
    const std::size_t round = i / starts.size();
    const NodeId start = starts[i % starts.size()];
    Rng rng(derive_seed(cfg.seed, {start, round}));
    corpus.walks[i] = walk_from(wg, cache ? &*cache : nullptr, start, cfg, rng);
  });
  return corpus;
}

std::string serialize_walks(const WalkCorpus& corpus, const TypedGraph& g) {
  std::string out;
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (i) out += ' ';
      out += escape_token(g.node(walk[i]).name);
    }
    out += '\n';
  }
  return out;
}

void write_walks(const WalkCorpus& corpus, const TypedGraph& g, const std::filesystem::path& path) {
  write_file(path, serialize_walks(corpus, g));
}

std::vector<std::vector<std::string>> parse_walks(std::string_view text) {
  std::vector<std::vector<std::string>> walks;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> walk;
    for (auto token : split(line, ' ')) {
      if (token.empty()) continue;
      auto name = unescape_token(token);
      if (!name) fail(ErrorKind::kFormatError, "walk line " + std::to_string(line_no) + ": bad escape");
      walk.push_back(std::move(*name));
    }
    walks.push_back(std::move(walk));
  }
  return walks;
}

std::vector<std::vector<std::string>> read_walks(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::kMissingArtifact, path.string());
  return parse_walks(read_file(path));
}

}  // namespace relpred
