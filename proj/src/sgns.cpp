#include "relpred/sgns.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "relpred/alias.hpp"
#include "relpred/error.hpp"
#include "relpred/parallel.hpp"
#include "relpred/random.hpp"
#include "relpred/simd/kernels.hpp"

namespace relpred {

void SgnsConfig::validate() const {
  if (dim < 1) fail(ErrorKind::kInvalidArgument, "dim must be >= 1");
  if (window < 1) fail(ErrorKind::kInvalidArgument, "window must be >= 1");
  if (negatives < 1) fail(ErrorKind::kInvalidArgument, "negatives must be >= 1");
  if (!(initial_lr > 0.0) || !(min_lr > 0.0)) fail(ErrorKind::kInvalidArgument, "learning rates must be > 0");
  if (min_lr > initial_lr) fail(ErrorKind::kInvalidArgument, "min_lr must be <= initial_lr");
  if (workers < 1) fail(ErrorKind::kInvalidArgument, "workers must be >= 1");
}

TokenCorpus TokenCorpus::from_names(const std::vector<std::vector<std::string>>& walks) {
  TokenCorpus out;
  std::unordered_map<std::string, std::uint32_t> index;
  for (const auto& walk : walks) {
    auto& sentence = out.sentences.emplace_back();
    sentence.reserve(walk.size());
    for (const auto& name : walk) {
      auto [it, inserted] = index.try_emplace(name, static_cast<std::uint32_t>(out.vocab.size()));
      if (inserted) out.vocab.push_back(name);
      sentence.push_back(it->second);
    }
  }
  return out;
}

TokenCorpus TokenCorpus::from_walks(const WalkCorpus& corpus, const TypedGraph& g) {
  TokenCorpus out;
  std::vector<std::uint32_t> index(g.node_count(), UINT32_MAX);
  for (const auto& walk : corpus.walks) {
    auto& sentence = out.sentences.emplace_back();
    sentence.reserve(walk.size());
    for (NodeId id : walk) {
      if (index[id] == UINT32_MAX) {
        index[id] = static_cast<std::uint32_t>(out.vocab.size());
        out.vocab.push_back(g.node(id).name);
      }
      sentence.push_back(index[id]);
    }
  }
  return out;
}

std::size_t TokenCorpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

SgnsGradients sgns_loss_and_grads(std::span<const double> center, std::span<const double> context,
                                  std::span<const std::span<const double>> noise) {
  const std::size_t d = center.size();
  if (context.size() != d) fail(ErrorKind::kDimensionMismatch, "context vector length");
  SgnsGradients g;
  g.center.assign(d, 0.0);
  g.context.assign(d, 0.0);

  const double s = simd::dot(center, context);
  const double pos_coef = sigmoid(s) - 1.0;
  g.loss = -log_sigmoid(s);
  simd::axpy(pos_coef, context, g.center);
  simd::axpy(pos_coef, center, g.context);

  for (const auto& n : noise) {
    if (n.size() != d) fail(ErrorKind::kDimensionMismatch, "noise vector length");
    const double t = simd::dot(center, n);
    const double neg_coef = sigmoid(t);
    g.loss -= log_sigmoid(-t);
    simd::axpy(neg_coef, n, g.center);
    auto& gn = g.noise.emplace_back(d, 0.0);
    simd::axpy(neg_coef, center, gn);
  }
  return g;
}

namespace {

std::size_t pairs_in(const std::vector<std::uint32_t>& sentence, std::size_t window) {
  std::size_t pairs = 0;
  const std::size_t n = sentence.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= window ? i - window : 0;
    const std::size_t hi = std::min(n - 1, i + window);
    pairs += hi - lo;
  }
  return pairs;
}

// Row access for the shared (multi-worker) mode: relaxed atomic per-scalar
// loads and stores, so concurrent updates may be lost but never torn.
void gather(std::span<double> dst, double* src) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = std::atomic_ref<double>(src[k]).load(std::memory_order_relaxed);
}

void scatter_add(double* dst, std::span<const double> delta) {
  for (std::size_t k = 0; k < delta.size(); ++k) {
    std::atomic_ref<double> ref(dst[k]);
    ref.store(ref.load(std::memory_order_relaxed) + delta[k], std::memory_order_relaxed);
  }
}

struct Scratch {
  explicit Scratch(std::size_t d, std::size_t k) : grad_center(d), delta(d), center(d), context(d), noise(k * d) {}
  std::vector<double> grad_center;
  std::vector<double> delta;
  std::vector<double> center;
  std::vector<double> context;
  std::vector<double> noise;
  std::vector<std::uint32_t> noise_ids;
  std::vector<double> noise_coef;
};

// One SGD step on a (center, context) pair. All gradients are evaluated at
// the pre-step parameters, then applied. Returns the pair loss.
template <bool Shared>
double train_pair(EmbeddingMatrix& e, std::uint32_t center, std::uint32_t context, Scratch& s, double lr) {
  const std::size_t d = e.dim();
  std::span<const double> u;
  std::span<const double> v;
  if constexpr (Shared) {
    gather(s.center, e.input(center).data());
    gather(s.context, e.output(context).data());
    u = s.center;
    v = s.context;
  } else {
    u = e.input(center);
    v = e.output(context);
  }

  const double dot_pos = simd::dot(u, v);
  const double pos_coef = sigmoid(dot_pos) - 1.0;
  double loss = -log_sigmoid(dot_pos);
  std::fill(s.grad_center.begin(), s.grad_center.end(), 0.0);
  simd::axpy(pos_coef, v, s.grad_center);

  s.noise_coef.resize(s.noise_ids.size());
  for (std::size_t j = 0; j < s.noise_ids.size(); ++j) {
    std::span<const double> n;
    if constexpr (Shared) {
      std::span<double> slot(s.noise.data() + j * d, d);
      gather(slot, e.output(s.noise_ids[j]).data());
      n = slot;
    } else {
      n = e.output(s.noise_ids[j]);
    }
    const double t = simd::dot(u, n);
    s.noise_coef[j] = sigmoid(t);
    loss -= log_sigmoid(-t);
    simd::axpy(s.noise_coef[j], n, s.grad_center);
  }

  if constexpr (Shared) {
    std::fill(s.delta.begin(), s.delta.end(), 0.0);
    simd::axpy(-lr * pos_coef, u, s.delta);
    scatter_add(e.output(context).data(), s.delta);
    for (std::size_t j = 0; j < s.noise_ids.size(); ++j) {
      std::fill(s.delta.begin(), s.delta.end(), 0.0);
      simd::axpy(-lr * s.noise_coef[j], u, s.delta);
      scatter_add(e.output(s.noise_ids[j]).data(), s.delta);
    }
    simd::scale(-lr, s.grad_center);
    scatter_add(e.input(center).data(), s.grad_center);
  } else {
    // u aliases the input row, which is only written last.
    simd::axpy(-lr * pos_coef, u, e.output(context));
    for (std::size_t j = 0; j < s.noise_ids.size(); ++j) simd::axpy(-lr * s.noise_coef[j], u, e.output(s.noise_ids[j]));
    simd::axpy(-lr, s.grad_center, e.input(center));
  }
  return loss;
}

}  // namespace

EmbeddingMatrix train_embeddings(const TokenCorpus& corpus, const SgnsConfig& cfg, TrainStats* stats) {
  cfg.validate();
  if (corpus.vocab.empty() || corpus.token_count() == 0) fail(ErrorKind::kEmptyCorpus, "no tokens to train on");

  const std::size_t d = cfg.dim;
  EmbeddingMatrix e(corpus.vocab, d);
  {
    Rng rng(derive_seed(cfg.seed, {0x1417}));
    const double half = 0.5 / static_cast<double>(d);
    for (double& x : e.input_data()) x = rng.uniform(-half, half);
  }

  std::vector<double> counts(corpus.vocab.size(), 0.0);
  for (const auto& s : corpus.sentences) {
    for (auto t : s) counts[t] += 1.0;
  }
  for (double& c : counts) c = std::pow(c, cfg.noise_exponent);
  const AliasTable noise_table = AliasTable::build(counts);

  std::vector<std::size_t> sentence_pairs(corpus.sentences.size());
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) sentence_pairs[i] = pairs_in(corpus.sentences[i], cfg.window);
  const std::size_t pairs_per_epoch = std::accumulate(sentence_pairs.begin(), sentence_pairs.end(), std::size_t{0});
  const double total_pairs = static_cast<double>(pairs_per_epoch * cfg.epochs);
  if (stats) {
    stats->pairs_per_epoch = pairs_per_epoch;
    stats->epoch_mean_loss.clear();
  }

  std::atomic<std::size_t> processed{0};
  const bool shared = cfg.workers > 1;
  std::vector<double> sentence_loss(corpus.sentences.size());

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    parallel_for(corpus.sentences.size(), cfg.workers, [&](std::size_t si) {
      const auto& sentence = corpus.sentences[si];
      Rng rng(derive_seed(cfg.seed, {epoch, si}));
      Scratch scratch(d, cfg.negatives);
      std::size_t done = processed.fetch_add(sentence_pairs[si], std::memory_order_relaxed);
      double loss = 0.0;
      const std::size_t n = sentence.size();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
        const std::size_t hi = std::min(n - 1, i + cfg.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const double progress = total_pairs > 0 ? static_cast<double>(done++) / total_pairs : 0.0;
          const double lr = std::max(cfg.min_lr, cfg.initial_lr - (cfg.initial_lr - cfg.min_lr) * progress);
          scratch.noise_ids.clear();
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            const auto id = noise_table.sample(rng);
            if (id != sentence[j]) scratch.noise_ids.push_back(id);
          }
          loss += shared ? train_pair<true>(e, sentence[i], sentence[j], scratch, lr)
                         : train_pair<false>(e, sentence[i], sentence[j], scratch, lr);
        }
      }
      sentence_loss[si] = loss;
    });
    if (stats) {
      const double sum = std::accumulate(sentence_loss.begin(), sentence_loss.end(), 0.0);
      stats->epoch_mean_loss.push_back(pairs_per_epoch ? sum / static_cast<double>(pairs_per_epoch) : 0.0);
    }
  }

  for (double x : e.input_data()) {
    if (!std::isfinite(x)) fail(ErrorKind::kInvalidArgument, "training diverged: non-finite embedding");
  }
  return e;
}

}  // namespace relpred
