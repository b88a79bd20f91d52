#include "relpred/alias.hpp"

#include <cmath>

#include "relpred/error.hpp"

namespace relpred {

AliasTable AliasTable::build(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail(ErrorKind::kInvalidArgument, "alias weights must be finite and >= 0");
    total += w;
  }
  if (weights.empty() || !(total > 0.0)) fail(ErrorKind::kAllZeroWeights, "no positive weight");

  const std::size_t n = weights.size();
  AliasTable t;
  t.prob_.resize(n);
  t.alias_.resize(n);

  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small;
  std::vector<std::uint32_t> large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    t.alias_[i] = static_cast<std::uint32_t>(i);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    t.prob_[s] = scaled[s];
    t.alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are 1 up to rounding.
  for (auto i : large) t.prob_[i] = 1.0;
  for (auto i : small) t.prob_[i] = 1.0;
  return t;
}

std::vector<double> AliasTable::distribution() const {
  const std::size_t n = prob_.size();
  std::vector<double> p(n, 0.0);
  const double col = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] += col * prob_[i];
    p[alias_[i]] += col * (1.0 - prob_[i]);
  }
  return p;
}

}  // namespace relpred
