#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "relpred/graph.hpp"

namespace relpred {

// Every generated node has one role inside its community; relation rules
// connect roles, optionally across communities.
enum class Role : std::uint8_t { kGeneric, kSpecific, kPlace, kAgent, kSense };

std::string_view to_string(Role role);

struct RelationRule {
  // Any node whose role is listed may be a source.
  std::vector<Role> source_roles;
  Role target_role;
  // Target community = (source community + offset) mod n_communities.
  std::size_t community_offset = 0;
  // Expected number of edges per source node; the fractional part is a
  // Bernoulli draw.
  double edges_per_source = 1.0;
};

struct SyntheticSpec {
  std::size_t n_communities = 4;
  std::size_t nodes_per_community = 50;
  // Nodes per community for each non-specific role; the rest are specific.
  std::size_t generics_per_community = 6;
  std::size_t places_per_community = 5;
  std::size_t agents_per_community = 5;
  std::size_t senses_per_community = 6;
  // r_hypo and r_agent-1 are never listed: they are generated as mirrors of
  // r_isa and r_agent.
  std::map<RelationCode, RelationRule> relation_rules;
  // Integer weights drawn uniformly from [weight_min, weight_max].
  int weight_min = 50;
  int weight_max = 120;
  double noise_rate = 0.05;
  // Nodes of a non-lexical type wired with an unknown relation type; they
  // exercise ingestion and subgraph filtering.
  std::size_t distractor_nodes = 8;
  std::uint64_t seed = 0;

  static SyntheticSpec defaults();
  // Throws kSpecInvalid.
  void validate() const;
};

struct GroundTruthEdge {
  NodeId src;
  RelationType rel;
  NodeId dst;
  double weight;
  bool noise;  // deliberately violates the relation's rule
};

struct SyntheticGraph {
  TypedGraph graph;
  std::vector<GroundTruthEdge> truth;
  std::vector<Role> roles;             // per node; distractors are kSense
  std::vector<std::size_t> community;  // per node; distractors get n_communities
  SyntheticSpec spec;
};

SyntheticGraph generate_synthetic(const SyntheticSpec& spec);

// Whether (src, rel, dst) obeys the generating rule (mirrors included).
bool satisfies_rule(const SyntheticGraph& s, const RelationType& rel, NodeId src, NodeId dst);

// Writes nodes.tsv, edges.tsv and truth.tsv (edge + rule/noise flag) into dir.
void write_synthetic(const SyntheticGraph& s, const std::filesystem::path& dir);

}  // namespace relpred
