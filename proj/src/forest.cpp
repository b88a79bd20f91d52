#include "relpred/forest.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>
#include <tuple>

#include "relpred/error.hpp"
#include "relpred/parallel.hpp"
#include "relpred/random.hpp"
#include "relpred/text_io.hpp"

namespace relpred {

void ForestConfig::validate() const {
  if (n_estimators < 1) fail(ErrorKind::kInvalidArgument, "n_estimators must be >= 1");
  if (workers < 1) fail(ErrorKind::kInvalidArgument, "workers must be >= 1");
  tree.validate();
}

double Forest::predict_proba(std::span<const double> features) const {
  if (features.size() != feature_dim) {
    fail(ErrorKind::kDimensionMismatch,
         "expected " + std::to_string(feature_dim) + " features, got " + std::to_string(features.size()));
  }
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict_proba(features);
  return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

int Forest::predict_label(std::span<const double> features, double threshold) const {
  return predict_proba(features) >= threshold ? 1 : 0;
}

bool Forest::operator==(const Forest& other) const {
  return relation == other.relation && feature_dim == other.feature_dim && single_class == other.single_class &&
         trees == other.trees && serialize_forest(*this) == serialize_forest(other);
}

TrainingSet training_set(const EdgeDataset& ds, RelationCode relation, ClassWeight class_weight) {
  const auto column = label_index(relation);
  if (!column) fail(ErrorKind::kInvalidArgument, "not a label relation: " + RelationType(relation).str());
  TrainingSet set;
  set.n_features = ds.feature_dim;
  std::size_t positives = 0;
  for (const auto& row : ds.rows) positives += row.labels[*column];
  const std::size_t n = ds.rows.size();
  const std::size_t negatives = n - positives;
  for (const auto& row : ds.rows) {
    const std::uint8_t label = row.labels[*column];
    double weight = 1.0;
    if (class_weight == ClassWeight::kBalanced) {
      weight = static_cast<double>(n) / (2.0 * static_cast<double>(label ? positives : negatives));
    }
    set.add(row.features, label, weight);
  }
  return set;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = rng.below(n);
  std::sort(out.begin(), out.end());
  return out;
}

Forest fit_forest(const EdgeDataset& train, RelationCode relation, const ForestConfig& cfg) {
  cfg.validate();
  if (train.empty()) fail(ErrorKind::kNoSamples, "empty training set");

  std::vector<std::size_t> order(train.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = train.rows[a];
    const auto& rb = train.rows[b];
    return std::tie(ra.source_id, ra.target_id, ra.features, ra.labels) <
           std::tie(rb.source_id, rb.target_id, rb.features, rb.labels);
  });
  EdgeDataset canonical;
  canonical.feature_dim = train.feature_dim;
  canonical.rows.reserve(order.size());
  for (auto i : order) canonical.rows.push_back(train.rows[i]);

  const TrainingSet data = training_set(canonical, relation, cfg.class_weight);

  Forest forest;
  forest.relation = relation;
  forest.config = cfg;
  forest.feature_dim = train.feature_dim;
  forest.single_class = std::all_of(data.y.begin(), data.y.end(), [&](auto l) { return l == data.y.front(); });
  forest.trees.resize(cfg.n_estimators);

  const std::size_t n = data.size();
  parallel_for(cfg.n_estimators, cfg.workers, [&](std::size_t t) {
    TreeConfig tree_cfg = cfg.tree;
    tree_cfg.seed = derive_seed(cfg.seed, {t, 0x74726565});
    std::vector<std::size_t> samples;
    if (cfg.bootstrap) {
      samples = bootstrap_indices(n, derive_seed(cfg.seed, {t, 0x626f6f74}));
    } else {
      samples.resize(n);
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    forest.trees[t] = fit_tree(data, samples, tree_cfg);
  });
  return forest;
}

std::vector<SweepPoint> sweep_n_estimators(const EdgeDataset& train, const EdgeDataset& validation,
                                           RelationCode relation, std::span<const std::size_t> grid,
                                           const ForestConfig& base_cfg) {
  if (grid.empty()) fail(ErrorKind::kInvalidArgument, "empty n_estimators grid");
  if (validation.empty()) fail(ErrorKind::kNoSamples, "empty validation set");
  const auto column = label_index(relation);
  if (!column) fail(ErrorKind::kInvalidArgument, "not a label relation");
  std::vector<SweepPoint> out;
  for (std::size_t n : grid) {
    ForestConfig cfg = base_cfg;
    cfg.n_estimators = n;
    cfg.seed = derive_seed(base_cfg.seed, {n});
    const Forest forest = fit_forest(train, relation, cfg);
    std::size_t correct = 0;
    for (const auto& row : validation.rows) correct += forest.predict_label(row.features) == row.labels[*column];
    out.push_back({n, static_cast<double>(correct) / static_cast<double>(validation.size())});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model file

namespace {

std::string optional_count(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : "unlimited"; }

std::string max_features_str(const TreeConfig& t) {
  switch (t.max_features) {
    case MaxFeatures::kSqrt: return "sqrt";
    case MaxFeatures::kAll: return "all";
    case MaxFeatures::kFixed: return "fixed:" + std::to_string(t.max_features_fixed);
  }
  return "sqrt";
}

class ModelReader {
 public:
  explicit ModelReader(std::string_view text) : lines_(split(text, '\n')) {}

  std::vector<std::string_view> next_fields() {
    while (pos_ < lines_.size() && lines_[pos_].empty()) ++pos_;
    if (pos_ >= lines_.size()) fail(ErrorKind::kFormatError, "model file truncated");
    line_no_ = pos_ + 1;
    return split(lines_[pos_++], ' ');
  }

  std::string_view value(std::string_view key) {
    const auto f = next_fields();
    if (f.size() != 2 || f[0] != key) bad("expected '" + std::string(key) + " <value>'");
    return f[1];
  }

  std::uint64_t count(std::string_view key) {
    const auto v = parse_int(value(key));
    if (!v || *v < 0) bad("bad integer for " + std::string(key));
    return static_cast<std::uint64_t>(*v);
  }

  std::optional<std::size_t> optional_count(std::string_view key) {
    const auto v = value(key);
    if (v == "unlimited") return std::nullopt;
    const auto n = parse_int(v);
    if (!n || *n < 0) bad("bad integer for " + std::string(key));
    return static_cast<std::size_t>(*n);
  }

  [[noreturn]] void bad(const std::string& what) const {
    fail(ErrorKind::kFormatError, "model line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

std::string serialize_forest(const Forest& f) {
  std::ostringstream out;
  const auto& c = f.config;
  out << "relpred-forest\n"
      << "format_version " << kModelFormatVersion << '\n'
      << "relation " << RelationType(f.relation).str() << '\n'
      << "feature_dim " << f.feature_dim << '\n'
      << "n_estimators " << c.n_estimators << '\n'
      << "bootstrap " << (c.bootstrap ? 1 : 0) << '\n'
      << "class_weight " << (c.class_weight == ClassWeight::kBalanced ? "balanced" : "none") << '\n'
      << "max_depth " << optional_count(c.tree.max_depth) << '\n'
      << "min_samples_split " << c.tree.min_samples_split << '\n'
      << "min_samples_leaf " << c.tree.min_samples_leaf << '\n'
      << "max_leaf_nodes " << optional_count(c.tree.max_leaf_nodes) << '\n'
      << "max_features " << max_features_str(c.tree) << '\n'
      << "seed " << c.seed << '\n'
      << "single_class " << (f.single_class ? 1 : 0) << '\n'
      << "trees " << f.trees.size() << '\n';
  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    const auto nodes = f.trees[t].nodes();
    out << "tree " << t << ' ' << nodes.size() << '\n';
    for (const auto& n : nodes) {
      out << "node " << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << format_double(n.positive_weight) << ' ' << format_double(n.total_weight) << ' ' << n.samples << '\n';
    }
  }
  out << "end\n";
  return std::move(out).str();
}

Forest parse_forest(std::string_view text) {
  ModelReader r(text);
  if (r.next_fields() != std::vector<std::string_view>{"relpred-forest"}) r.bad("not a relpred forest model");
  if (r.count("format_version") != static_cast<std::uint64_t>(kModelFormatVersion)) {
    r.bad("unsupported model format version");
  }
  Forest f;
  const auto rel = RelationType::parse(r.value("relation"));
  if (!is_predictable(rel)) r.bad("relation is not a label relation");
  f.relation = rel.code;
  f.feature_dim = r.count("feature_dim");
  auto& c = f.config;
  c.n_estimators = r.count("n_estimators");
  c.bootstrap = r.count("bootstrap") != 0;
  const auto cw = r.value("class_weight");
  if (cw != "none" && cw != "balanced") r.bad("bad class_weight");
  c.class_weight = cw == "balanced" ? ClassWeight::kBalanced : ClassWeight::kNone;
  c.tree.max_depth = r.optional_count("max_depth");
  c.tree.min_samples_split = r.count("min_samples_split");
  c.tree.min_samples_leaf = r.count("min_samples_leaf");
  c.tree.max_leaf_nodes = r.optional_count("max_leaf_nodes");
  const auto mf = r.value("max_features");
  if (mf == "sqrt") {
    c.tree.max_features = MaxFeatures::kSqrt;
  } else if (mf == "all") {
    c.tree.max_features = MaxFeatures::kAll;
  } else if (mf.starts_with("fixed:")) {
    const auto n = parse_int(mf.substr(6));
    if (!n || *n < 1) r.bad("bad fixed max_features");
    c.tree.max_features = MaxFeatures::kFixed;
    c.tree.max_features_fixed = static_cast<std::size_t>(*n);
  } else {
    r.bad("bad max_features");
  }
  {
    const auto v = r.value("seed");
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
    if (ec != std::errc{} || ptr != v.data() + v.size()) r.bad("bad seed");
    c.seed = seed;
  }
  f.single_class = r.count("single_class") != 0;
  const auto tree_count = r.count("trees");
  if (tree_count != c.n_estimators) r.bad("tree count does not match n_estimators");
  for (std::uint64_t t = 0; t < tree_count; ++t) {
    const auto head = r.next_fields();
    const auto node_count = head.size() == 3 ? parse_int(head[2]) : std::nullopt;
    if (head.size() != 3 || head[0] != "tree" || parse_int(head[1]) != static_cast<std::int64_t>(t) || !node_count ||
        *node_count < 1) {
      r.bad("bad tree header");
    }
    std::vector<TreeNode> nodes;
    for (std::int64_t k = 0; k < *node_count; ++k) {
      const auto fs = r.next_fields();
      if (fs.size() != 8 || fs[0] != "node") r.bad("bad node record");
      const auto feature = parse_int(fs[1]);
      const auto threshold = parse_double(fs[2]);
      const auto left = parse_int(fs[3]);
      const auto right = parse_int(fs[4]);
      const auto pw = parse_double(fs[5]);
      const auto tw = parse_double(fs[6]);
      const auto samples = parse_int(fs[7]);
      if (!feature || !threshold || !left || !right || !pw || !tw || !samples || *samples < 0) r.bad("bad node field");
      nodes.push_back({static_cast<std::int32_t>(*feature), *threshold, static_cast<std::int32_t>(*left),
                       static_cast<std::int32_t>(*right), *pw, *tw, static_cast<std::uint64_t>(*samples)});
    }
    f.trees.emplace_back(std::move(nodes), f.feature_dim);
  }
  if (r.next_fields() != std::vector<std::string_view>{"end"}) r.bad("missing end marker");
  return f;
}

void write_forest(const Forest& f, const std::filesystem::path& path) { write_file(path, serialize_forest(f)); }

Forest read_forest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::kMissingArtifact, path.string());
  return parse_forest(read_file(path));
}

}  // namespace relpred
