#include "relpred/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "relpred/error.hpp"
#include "relpred/random.hpp"
#include "relpred/text_io.hpp"

namespace relpred {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kGeneric: return "generic";
    case Role::kSpecific: return "specific";
    case Role::kPlace: return "place";
    case Role::kAgent: return "agent";
    case Role::kSense: return "sense";
  }
  return "unknown";
}

SyntheticSpec SyntheticSpec::defaults() {
  SyntheticSpec s;
  s.relation_rules = {
      {RelationCode::kSyn, {{Role::kSpecific}, Role::kSpecific, 0, 8.0}},
      {RelationCode::kIsa, {{Role::kSpecific}, Role::kGeneric, 3, 2.0}},
      {RelationCode::kLieu, {{Role::kSpecific}, Role::kPlace, 1, 2.0}},
      {RelationCode::kAgent, {{Role::kSpecific}, Role::kAgent, 2, 2.0}},
      // Refinements tie every non-specific term to its own community.
      {RelationCode::kRaffSem, {{Role::kGeneric, Role::kPlace, Role::kAgent}, Role::kSense, 0, 6.0}},
  };
  return s;
}

void SyntheticSpec::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::kSpecInvalid, what); };
  if (n_communities < 1) bad("n_communities must be >= 1");
  const std::size_t special = generics_per_community + places_per_community + agents_per_community +
                              senses_per_community;
  if (nodes_per_community < special + 2) bad("nodes_per_community too small for the role counts");
  if (!(noise_rate >= 0.0 && noise_rate < 1.0)) bad("noise_rate must be in [0, 1)");
  if (weight_min < 0 || weight_max < weight_min) bad("need 0 <= weight_min <= weight_max");
  for (const auto& [code, rule] : relation_rules) {
    if (code == RelationCode::kHypo || code == RelationCode::kAgentInv) bad("mirror relations are implied");
    if (code == RelationCode::kOther) bad("rules need a known relation type");
    if (rule.source_roles.empty()) bad("rules need at least one source role");
    if (!(rule.edges_per_source >= 0.0)) bad("edges_per_source must be >= 0");
  }
}

namespace {

std::size_t role_count(const SyntheticSpec& s, Role role) {
  switch (role) {
    case Role::kGeneric: return s.generics_per_community;
    case Role::kPlace: return s.places_per_community;
    case Role::kAgent: return s.agents_per_community;
    case Role::kSense: return s.senses_per_community;
    case Role::kSpecific:
      return s.nodes_per_community - s.generics_per_community - s.places_per_community - s.agents_per_community -
             s.senses_per_community;
  }
  return 0;
}

std::optional<RelationCode> mirror_of(RelationCode code) {
  if (code == RelationCode::kIsa) return RelationCode::kHypo;
  if (code == RelationCode::kAgent) return RelationCode::kAgentInv;
  return std::nullopt;
}

}  // namespace

bool satisfies_rule(const SyntheticGraph& s, const RelationType& rel, NodeId src, NodeId dst) {
  RelationCode code = rel.code;
  if (code == RelationCode::kHypo) {
    code = RelationCode::kIsa;
    std::swap(src, dst);
  } else if (code == RelationCode::kAgentInv) {
    code = RelationCode::kAgent;
    std::swap(src, dst);
  }
  const auto it = s.spec.relation_rules.find(code);
  if (it == s.spec.relation_rules.end() || rel.code == RelationCode::kOther) return false;
  const auto& rule = it->second;
  const std::size_t k = s.spec.n_communities;
  if (s.community[src] >= k || s.community[dst] >= k) return false;
  return src != dst && std::ranges::find(rule.source_roles, s.roles[src]) != rule.source_roles.end() && s.roles[dst] == rule.target_role &&
         s.community[dst] == (s.community[src] + rule.community_offset) % k;
}

SyntheticGraph generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, {0x73796e}));
  SyntheticGraph out;
  out.spec = spec;
  GraphBuilder builder;

  // members[community][role] -> node ids
  const std::size_t k = spec.n_communities;
  std::vector<std::map<Role, std::vector<NodeId>>> members(k);
  constexpr Role kRoleOrder[] = {Role::kGeneric, Role::kSpecific, Role::kPlace, Role::kAgent, Role::kSense};
  for (std::size_t c = 0; c < k; ++c) {
    for (Role role : kRoleOrder) {
      for (std::size_t i = 0; i < role_count(spec, role); ++i) {
        const std::string name = "c" + std::to_string(c) + "_" + std::string(to_string(role)) + std::to_string(i);
        const NodeType type = role == Role::kSense ? NodeType::form() : NodeType::term();
        const NodeId id = builder.add_node(name, type, static_cast<double>(10 + rng.below(991)));
        members[c][role].push_back(id);
        out.roles.push_back(role);
        out.community.push_back(c);
      }
    }
  }
  const std::size_t lexical_nodes = builder.node_count();
  for (std::size_t i = 0; i < spec.distractor_nodes; ++i) {
    builder.add_node("pos_" + std::to_string(i), NodeType::parse("n_pos"), 0.0);
    out.roles.push_back(Role::kSense);
    out.community.push_back(k);
  }

  auto draw_weight = [&] {
    const auto span = static_cast<std::uint64_t>(spec.weight_max - spec.weight_min) + 1;
    return static_cast<double>(spec.weight_min + static_cast<int>(rng.below(span)));
  };
  std::set<std::tuple<NodeId, RelationType, NodeId>> seen;
  auto emit = [&](NodeId src, RelationType rel, NodeId dst, double weight, bool noise) {
    seen.insert({src, rel, dst});
    builder.add_edge(src, rel, dst, weight);
    out.truth.push_back({src, std::move(rel), dst, weight, noise});
  };

  for (const auto& [code, rule] : spec.relation_rules) {
    const auto mirror = mirror_of(code);
    for (std::size_t c = 0; c < k; ++c) {
      const auto& targets = members[(c + rule.community_offset) % k][rule.target_role];
      std::vector<NodeId> sources;
      for (Role role : rule.source_roles) {
        const auto& m = members[c][role];
        sources.insert(sources.end(), m.begin(), m.end());
      }
      for (NodeId src : sources) {
        auto edges = static_cast<std::size_t>(std::floor(rule.edges_per_source));
        if (rng.bernoulli(rule.edges_per_source - std::floor(rule.edges_per_source))) ++edges;
        for (std::size_t e = 0; e < edges; ++e) {
          const bool noise = rng.bernoulli(spec.noise_rate);
          // Rejection-sample an unused pair that obeys (or, for noise,
          // violates) the rule.
          for (int attempt = 0; attempt < 64; ++attempt) {
            NodeId s = src;
            NodeId d = 0;
            if (noise) {
              s = static_cast<NodeId>(rng.below(lexical_nodes));
              d = static_cast<NodeId>(rng.below(lexical_nodes));
            } else {
              if (targets.empty()) break;
              d = targets[rng.below(targets.size())];
            }
            if (s == d || seen.contains({s, code, d})) continue;
            if (satisfies_rule(out, code, s, d) == noise) continue;
            const double w = draw_weight();
            emit(s, code, d, w, noise);
            if (mirror) emit(d, *mirror, s, w, noise);
            break;
          }
        }
      }
    }
  }

  const RelationType distractor_rel = RelationType::parse("r_pos");
  for (std::size_t i = 0; i < spec.distractor_nodes; ++i) {
    const auto pos_id = static_cast<NodeId>(lexical_nodes + i);
    for (int e = 0; e < 5; ++e) {
      const auto term = static_cast<NodeId>(rng.below(lexical_nodes));
      if (!seen.contains({term, distractor_rel, pos_id})) emit(term, distractor_rel, pos_id, draw_weight(), false);
    }
  }

  out.graph = std::move(builder).build();
  return out;
}

void write_synthetic(const SyntheticGraph& s, const std::filesystem::path& dir) {
  write_graph(s.graph, dir / "nodes.tsv", dir / "edges.tsv");
  std::string truth = "# src\trel\tdst\tweight\tkind\n";
  for (const auto& e : s.truth) {
    truth += s.graph.node(e.src).name + '\t' + e.rel.str() + '\t' + s.graph.node(e.dst).name + '\t' +
             format_double(e.weight) + '\t' + (e.noise ? "noise" : "rule") + '\n';
  }
  write_file(dir / "truth.tsv", truth);
}

}  // namespace relpred
