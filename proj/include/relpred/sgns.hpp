#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relpred/embedding.hpp"
#include "relpred/graph.hpp"
#include "relpred/walker.hpp"

namespace relpred {

struct SgnsConfig {
  std::size_t dim = 20;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_lr = 0.025;
  double min_lr = 1e-4;
  double noise_exponent = 0.75;
  std::uint64_t seed = 0;
  // 1 = deterministic reference mode; >1 = lock-free shared updates.
  std::size_t workers = 1;

  void validate() const;
};

// Walks as sequences of vocabulary indices. Vocabulary order is order of
// first appearance in the walks.
struct TokenCorpus {
  std::vector<std::string> vocab;
  std::vector<std::vector<std::uint32_t>> sentences;

  static TokenCorpus from_walks(const WalkCorpus& corpus, const TypedGraph& g);
  static TokenCorpus from_names(const std::vector<std::vector<std::string>>& walks);

  std::size_t token_count() const;
};

struct SgnsGradients {
  double loss = 0.0;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<std::vector<double>> noise;
};

// loss = -log s(u.v) - sum_j log s(-u.n_j), with s the logistic function,
// and its exact partial derivatives with respect to u, v and every n_j.
SgnsGradients sgns_loss_and_grads(std::span<const double> center, std::span<const double> context,
                                  std::span<const std::span<const double>> noise);

// Numerically stable log(s(x)).
double log_sigmoid(double x);
double sigmoid(double x);

struct TrainStats {
  std::vector<double> epoch_mean_loss;  // per (center, context) pair
  std::size_t pairs_per_epoch = 0;
};

// Skip-gram with negative sampling. Throws kEmptyCorpus.
EmbeddingMatrix train_embeddings(const TokenCorpus& corpus, const SgnsConfig& cfg, TrainStats* stats = nullptr);

}  // namespace relpred
