#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "relpred/error.hpp"
#include "relpred/random.hpp"
#include "relpred/sgns.hpp"

using namespace relpred;

namespace {

struct Config {
  std::vector<double> u, v;
  std::vector<std::vector<double>> n;
};

Config random_config(Rng& rng, std::size_t d, std::size_t k) {
  auto vec = [&] {
    std::vector<double> x(d);
    for (auto& e : x) e = rng.uniform(-1.0, 1.0);
    return x;
  };
  Config c{vec(), vec(), {}};
  for (std::size_t j = 0; j < k; ++j) c.n.push_back(vec());
  return c;
}

double loss_of(const Config& c) {
  std::vector<std::span<const double>> views(c.n.begin(), c.n.end());
  return sgns_loss_and_grads(c.u, c.v, views).loss;
}

SgnsGradients grads_of(const Config& c) {
  std::vector<std::span<const double>> views(c.n.begin(), c.n.end());
  return sgns_loss_and_grads(c.u, c.v, views);
}

// Relative error with an absolute floor so that near-zero components are
// judged on absolute error instead.
double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

double central_difference(Config c, std::vector<double> Config::*member, std::size_t j, std::size_t i, double h) {
  auto& target = j == SIZE_MAX ? c.*member : c.n[j];
  const double x = target[i];
  target[i] = x + h;
  const double up = loss_of(c);
  target[i] = x - h;
  const double down = loss_of(c);
  return (up - down) / (2 * h);
}

}  // namespace

TEST_CASE("loss at zero dot product") {
  const std::vector<double> u = {0.3, -0.2};
  const std::vector<double> v = {0.2, 0.3};  // u.v = 0
  const auto g = sgns_loss_and_grads(u, v, {});
  CHECK(g.loss == doctest::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(g.context[0] == doctest::Approx(-0.5 * u[0]));
  CHECK(g.context[1] == doctest::Approx(-0.5 * u[1]));
  CHECK(g.noise.empty());
}

TEST_CASE("zero centre vector gives -v/2 + sum n/2") {
  const std::vector<double> u = {0.0, 0.0, 0.0};
  const std::vector<double> v = {1.0, 2.0, -1.0};
  const std::vector<double> n1 = {0.5, 0.0, 4.0};
  const std::vector<double> n2 = {-2.0, 1.0, 1.0};
  const std::vector<std::span<const double>> noise = {n1, n2};
  const auto g = sgns_loss_and_grads(u, v, noise);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::isfinite(g.center[i]));
    CHECK(g.center[i] == doctest::Approx(-0.5 * v[i] + 0.5 * n1[i] + 0.5 * n2[i]));
    CHECK(g.noise[0][i] == 0.0);
    CHECK(g.context[i] == 0.0);
  }
  CHECK(g.loss == doctest::Approx(3 * std::log(2.0)));
}

TEST_CASE("sigmoid helpers are stable at extremes") {
  CHECK(sigmoid(0) == 0.5);
  CHECK(sigmoid(800) == 1.0);
  CHECK(sigmoid(-800) == 0.0);
  CHECK(std::isfinite(log_sigmoid(-800)));
  CHECK(log_sigmoid(-800) == doctest::Approx(-800));
  CHECK(log_sigmoid(800) == 0.0);
  CHECK(log_sigmoid(1.5) == doctest::Approx(std::log(1.0 / (1.0 + std::exp(-1.5)))));
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(2024);
  const double h = 1e-4;
  double worst = 0.0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto c = random_config(rng, 8, 3);
    const auto g = grads_of(c);
    for (std::size_t i = 0; i < 8; ++i) {
      worst = std::max(worst, rel_err(g.center[i], central_difference(c, &Config::u, SIZE_MAX, i, h)));
      worst = std::max(worst, rel_err(g.context[i], central_difference(c, &Config::v, SIZE_MAX, i, h)));
      for (std::size_t j = 0; j < 3; ++j) {
        worst = std::max(worst, rel_err(g.noise[j][i], central_difference(c, nullptr, j, i, h)));
      }
    }
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("vocabulary follows first appearance") {
  const auto corpus = TokenCorpus::from_names({{"b", "a", "b"}, {"c", "a"}});
  CHECK(corpus.vocab == std::vector<std::string>{"b", "a", "c"});
  CHECK(corpus.sentences[0] == std::vector<std::uint32_t>{0, 1, 0});
  CHECK(corpus.sentences[1] == std::vector<std::uint32_t>{2, 1});
  CHECK(corpus.token_count() == 5);
}

TEST_CASE("zero epochs returns the initial matrix") {
  const auto corpus = TokenCorpus::from_names({{"a", "b", "c"}});
  SgnsConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 0;
  auto e = train_embeddings(corpus, cfg);
  REQUIRE(e.size() == 3);
  for (double x : e.input_data()) CHECK(std::abs(x) <= 0.5 / 4);
  for (double x : e.output_data()) CHECK(x == 0.0);
  cfg.epochs = 1;
  cfg.initial_lr = cfg.min_lr = 1e-300;  // effectively no movement, but a different code path
  const auto moved = train_embeddings(corpus, cfg);
  for (std::size_t i = 0; i < e.input_data().size(); ++i) {
    CHECK(moved.input_data()[i] == doctest::Approx(e.input_data()[i]));
  }
}

TEST_CASE("a co-occurring pair ends up closer than a random vector") {
  std::vector<std::vector<std::string>> walks(1000, {"a", "b"});
  walks.push_back({"c", "d"});
  const auto corpus = TokenCorpus::from_names(walks);
  SgnsConfig cfg;
  cfg.dim = 8;
  cfg.window = 1;
  cfg.seed = 3;
  const auto e = train_embeddings(corpus, cfg);
  auto cos = [](std::span<const double> x, std::span<const double> y) {
    double xy = 0, xx = 0, yy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xy += x[i] * y[i];
      xx += x[i] * x[i];
      yy += y[i] * y[i];
    }
    return xy / std::sqrt(xx * yy);
  };
  Rng rng(1);
  std::vector<double> x(8);
  for (auto& v : x) v = rng.uniform(-1, 1);
  const auto a = e.index_of("a");
  const auto b = e.index_of("b");
  CHECK(cos(e.input(a), e.output(b)) > cos(e.input(a), x));
  CHECK(cos(e.input(a), e.output(b)) > 0.9);
}

TEST_CASE("training is deterministic with one worker and the loss goes down") {
  Rng rng(4);
  std::vector<std::vector<std::string>> walks;
  for (int w = 0; w < 40; ++w) {
    std::vector<std::string> walk;
    std::size_t cur = rng.below(30);
    for (int s = 0; s < 20; ++s) {
      walk.push_back("n" + std::to_string(cur));
      cur = (cur + 1 + rng.below(3)) % 30;
    }
    walks.push_back(walk);
  }
  const auto corpus = TokenCorpus::from_names(walks);
  SgnsConfig cfg;
  cfg.dim = 10;
  cfg.seed = 77;
  TrainStats stats;
  const auto a = train_embeddings(corpus, cfg, &stats);
  const auto b = train_embeddings(corpus, cfg);
  CHECK(a == b);
  REQUIRE(stats.epoch_mean_loss.size() == cfg.epochs);
  CHECK(stats.pairs_per_epoch >= 1000);
  CHECK(stats.epoch_mean_loss.back() <= stats.epoch_mean_loss.front());
  for (double x : a.input_data()) CHECK(std::isfinite(x));

  cfg.seed = 78;
  CHECK_FALSE(train_embeddings(corpus, cfg) == a);
}

TEST_CASE("shared-memory training keeps every row finite") {
  std::vector<std::vector<std::string>> walks;
  for (int w = 0; w < 200; ++w) {
    std::vector<std::string> walk;
    for (int s = 0; s < 15; ++s) walk.push_back("n" + std::to_string((w * 7 + s * 3) % 50));
    walks.push_back(walk);
  }
  const auto corpus = TokenCorpus::from_names(walks);
  SgnsConfig cfg;
  cfg.workers = 4;
  const auto e = train_embeddings(corpus, cfg);
  CHECK(e.size() == 50);
  for (double x : e.input_data()) CHECK(std::isfinite(x));
}

TEST_CASE("empty corpus and bad configs throw") {
  CHECK_THROWS_AS(train_embeddings(TokenCorpus{}, SgnsConfig{}), Error);
  SgnsConfig cfg;
  cfg.dim = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.min_lr = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
