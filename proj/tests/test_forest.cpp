#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "relpred/error.hpp"
#include "relpred/forest.hpp"
#include "relpred/random.hpp"
#include "support.hpp"

using namespace relpred;

namespace {

// Rows in canonical order; r_syn is a noisy function of the first two
// features, r_isa of the third.
EdgeDataset synthetic_rows(std::uint64_t seed, std::size_t n, std::size_t dim = 6) {
  Rng rng(seed);
  EdgeDataset ds;
  ds.feature_dim = dim;
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRow r;
    r.source_id = static_cast<NodeId>(i);
    r.target_id = static_cast<NodeId>(n + i);
    r.source_name = "s" + std::to_string(i);
    r.target_name = "t" + std::to_string(i);
    for (std::size_t k = 0; k < dim; ++k) r.features.push_back(rng.uniform(-1, 1));
    r.labels[0] = (r.features[0] + r.features[1] > 0) != rng.bernoulli(0.05) ? 1 : 0;
    r.labels[1] = r.features[2] > 0.3 ? 1 : 0;
    ds.rows.push_back(std::move(r));
  }
  return ds;
}

Forest constant_forest(std::size_t positive, std::size_t negative) {
  Forest f;
  f.feature_dim = 2;
  for (std::size_t i = 0; i < positive + negative; ++i) {
    TreeNode leaf;
    leaf.total_weight = 3;
    leaf.positive_weight = i < positive ? 3 : 0;
    leaf.samples = 3;
    f.trees.emplace_back(std::vector<TreeNode>{leaf}, 2);
  }
  f.config.n_estimators = f.trees.size();
  return f;
}

}  // namespace

TEST_CASE("probability is the mean leaf fraction") {
  const std::vector<double> x = {0.1, 0.2};
  const auto f = constant_forest(49, 21);
  CHECK(f.trees.size() == 70);
  CHECK(std::abs(f.predict_proba(x) - 0.7) <= 1e-15);
  CHECK(f.predict_label(x) == 1);
  CHECK(constant_forest(70, 0).predict_proba(x) == 1.0);
  CHECK(constant_forest(35, 35).predict_proba(x) == 0.5);
  CHECK(constant_forest(35, 35).predict_label(x) == 1);
  CHECK(constant_forest(14, 56).predict_label(x) == 0);
  const std::vector<double> wrong = {1.0};
  CHECK_THROWS_AS(f.predict_proba(wrong), Error);
}

TEST_CASE("seventy trees by default") {
  const auto ds = synthetic_rows(1, 60);
  const auto f = fit_forest(ds, RelationCode::kSyn, ForestConfig{});
  CHECK(f.trees.size() == 70);
  CHECK(f.feature_dim == 6);
  CHECK_FALSE(f.single_class);
}

TEST_CASE("without bootstrap and with all features the forest is one tree") {
  const auto ds = synthetic_rows(2, 150);
  ForestConfig cfg;
  cfg.n_estimators = 7;
  cfg.bootstrap = false;
  cfg.tree.max_features = MaxFeatures::kAll;
  const auto f = fit_forest(ds, RelationCode::kSyn, cfg);
  const auto tree = fit_tree(training_set(ds, RelationCode::kSyn), cfg.tree);
  for (const auto& t : f.trees) CHECK(t == tree);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-1.2, 1.2);
    CHECK(f.predict_proba(x) == tree.leaf_for(x).positive_fraction());
  }
}

TEST_CASE("bootstrap keeps about 63.2% unique rows") {
  const auto idx = bootstrap_indices(10000, 12);
  CHECK(idx.size() == 10000);
  const std::set<std::size_t> unique(idx.begin(), idx.end());
  const double frac = static_cast<double>(unique.size()) / 10000.0;
  CHECK(std::abs(frac - (1.0 - std::exp(-1.0))) <= 0.03);
  for (auto i : idx) CHECK(i < 10000);
}

TEST_CASE("row order does not matter") {
  const auto ds = synthetic_rows(4, 120);
  auto shuffled = ds;
  Rng rng(8);
  shuffle(std::span<DatasetRow>(shuffled.rows), rng);
  ForestConfig cfg;
  cfg.n_estimators = 15;
  cfg.seed = 5;
  const auto a = fit_forest(ds, RelationCode::kSyn, cfg);
  const auto b = fit_forest(shuffled, RelationCode::kSyn, cfg);
  CHECK(a == b);
  cfg.workers = 3;
  CHECK(fit_forest(ds, RelationCode::kSyn, cfg) == a);
}

TEST_CASE("monotone rescaling leaves labels unchanged") {
  const auto ds = synthetic_rows(5, 150);
  ForestConfig cfg;
  cfg.n_estimators = 11;
  cfg.seed = 6;
  const auto base = fit_forest(ds, RelationCode::kSyn, cfg);

  // A power-of-two scale maps every midpoint exactly, so any input agrees.
  auto scaled = ds;
  for (auto& r : scaled.rows) {
    for (auto& v : r.features) v *= 8.0;
  }
  const auto f8 = fit_forest(scaled, RelationCode::kSyn, cfg);
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(6);
    for (auto& v : x) v = rng.uniform(-1, 1);
    auto y = x;
    for (auto& v : y) v *= 8.0;
    CHECK(base.predict_label(x) == f8.predict_label(y));
  }

  // A nonlinear monotone map keeps the training partitions.
  auto cubed = ds;
  for (auto& r : cubed.rows) {
    for (auto& v : r.features) v = v * v * v + v;
  }
  const auto fc = fit_forest(cubed, RelationCode::kSyn, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(base.predict_label(ds.rows[i].features) == fc.predict_label(cubed.rows[i].features));
  }
}

TEST_CASE("balanced class weights") {
  auto ds = synthetic_rows(6, 40);
  const auto t = training_set(ds, RelationCode::kIsa, ClassWeight::kBalanced);
  std::size_t pos = 0;
  for (auto y : t.y) pos += y;
  REQUIRE(pos > 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double expect = 40.0 / (2.0 * static_cast<double>(t.y[i] ? pos : 40 - pos));
    CHECK(t.w[i] == doctest::Approx(expect));
  }
  ForestConfig cfg;
  cfg.class_weight = ClassWeight::kBalanced;
  cfg.n_estimators = 5;
  const auto f = fit_forest(ds, RelationCode::kIsa, cfg);
  for (const auto& r : ds.rows) CHECK((f.predict_proba(r.features) >= 0 && f.predict_proba(r.features) <= 1));
}

TEST_CASE("single-class training is flagged but still predicts") {
  auto ds = synthetic_rows(7, 30);
  const auto f = fit_forest(ds, RelationCode::kAgent, ForestConfig{});
  CHECK(f.single_class);
  CHECK(f.predict_proba(ds.rows[0].features) == 0.0);
  CHECK_THROWS_AS(fit_forest(EdgeDataset{}, RelationCode::kSyn, ForestConfig{}), Error);
  CHECK_THROWS_AS(fit_forest(ds, RelationCode::kRaffSem, ForestConfig{}), Error);
}

TEST_CASE("model files round-trip") {
  const auto ds = synthetic_rows(9, 80);
  ForestConfig cfg;
  cfg.n_estimators = 4;
  cfg.tree.max_depth = 6;
  cfg.tree.max_features = MaxFeatures::kFixed;
  cfg.tree.max_features_fixed = 3;
  cfg.class_weight = ClassWeight::kBalanced;
  const auto f = fit_forest(ds, RelationCode::kHypo, cfg);
  testing::TempDir dir("forest");
  write_forest(f, dir / "m.model");
  const auto back = read_forest(dir / "m.model");
  CHECK(back == f);
  CHECK(serialize_forest(back) == serialize_forest(f));
  CHECK(back.relation == RelationCode::kHypo);
  CHECK(back.config.tree.max_depth == 6u);
  for (const auto& r : ds.rows) CHECK(back.predict_proba(r.features) == f.predict_proba(r.features));
  const auto text = serialize_forest(f);
  CHECK(text.find("format_version 1") != std::string::npos);
  CHECK_THROWS_AS(parse_forest("relpred-forest\nformat_version 99\n"), Error);
}

TEST_CASE("sweep grid") {
  CHECK(kDefaultSweepGrid.size() == 9);
  CHECK(kDefaultSweepGrid.front() == 10);
  CHECK(kDefaultSweepGrid.back() == 170);
  for (std::size_t i = 1; i < kDefaultSweepGrid.size(); ++i) CHECK(kDefaultSweepGrid[i] - kDefaultSweepGrid[i - 1] == 20);
  const auto train = synthetic_rows(10, 100);
  const auto val = synthetic_rows(11, 50);
  const std::vector<std::size_t> one = {1};
  const auto pts = sweep_n_estimators(train, val, RelationCode::kSyn, one, ForestConfig{});
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].n_estimators == 1);
  CHECK((pts[0].accuracy >= 0 && pts[0].accuracy <= 1));
}
