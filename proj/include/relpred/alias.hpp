#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "relpred/random.hpp"

namespace relpred {

// Walker/Vose alias table: O(n) construction, O(1) draws from a fixed
// discrete distribution. Outcomes are indices 0..n-1 into the input weights.
class AliasTable {
 public:
  AliasTable() = default;

  // Throws kAllZeroWeights if no weight is positive, kInvalidArgument on a
  // negative or non-finite weight.
  static AliasTable build(std::span<const double> weights);

  std::size_t size() const { return prob_.size(); }
  bool empty() const { return prob_.empty(); }

  std::uint32_t sample(Rng& rng) const {
    const auto column = static_cast<std::uint32_t>(rng.below(prob_.size()));
    return rng.uniform() < prob_[column] ? column : alias_[column];
  }

  // Exact probability of each outcome implied by the table.
  std::vector<double> distribution() const;

  std::span<const double> prob() const { return prob_; }
  std::span<const std::uint32_t> alias() const { return alias_; }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

}  // namespace relpred
