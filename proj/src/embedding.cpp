#include "relpred/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "relpred/error.hpp"
#include "relpred/simd/kernels.hpp"
#include "relpred/text_io.hpp"

namespace relpred {

EmbeddingMatrix::EmbeddingMatrix(std::vector<std::string> vocab, std::size_t dim)
    : vocab_(std::move(vocab)), dim_(dim), input_(vocab_.size() * dim, 0.0), output_(vocab_.size() * dim, 0.0) {
  if (dim == 0) fail(ErrorKind::kInvalidArgument, "embedding dimension must be >= 1");
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], i).second) fail(ErrorKind::kInvalidArgument, "duplicate vocab entry " + vocab_[i]);
  }
}

std::optional<std::size_t> EmbeddingMatrix::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingMatrix::index_of(std::string_view name) const {
  const auto idx = find(name);
  if (!idx) fail(ErrorKind::kUnknownName, std::string(name));
  return *idx;
}

namespace {

double norm(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

}  // namespace

double cosine_similarity(const EmbeddingMatrix& e, std::string_view a, std::string_view b) {
  const auto va = e.vector(a);
  const auto vb = e.vector(b);
  const double na = norm(va);
  const double nb = norm(vb);
  if (na == 0.0) fail(ErrorKind::kZeroVector, std::string(a));
  if (nb == 0.0) fail(ErrorKind::kZeroVector, std::string(b));
  // Normalize before the dot so that cos(a, a) is 1 to rounding.
  std::vector<double> ua(va.begin(), va.end());
  std::vector<double> ub(vb.begin(), vb.end());
  simd::scale(1.0 / na, ua);
  simd::scale(1.0 / nb, ub);
  return std::clamp(simd::dot(ua, ub), -1.0, 1.0);
}

std::vector<ScoredName> analogy_query(const EmbeddingMatrix& e, std::span<const std::string> positive,
                                      std::span<const std::string> negative, std::size_t top_n) {
  if (positive.empty() && negative.empty()) fail(ErrorKind::kEmptyQuery, "no query terms");
  std::vector<double> query(e.dim(), 0.0);
  std::vector<bool> excluded(e.size(), false);
  auto accumulate = [&](const std::string& name, double sign) {
    const std::size_t idx = e.index_of(name);
    const auto v = e.input(idx);
    const double n = norm(v);
    if (n == 0.0) fail(ErrorKind::kZeroVector, name);
    simd::axpy(sign / n, v, query);
    excluded[idx] = true;
  };
  for (const auto& name : positive) accumulate(name, 1.0);
  for (const auto& name : negative) accumulate(name, -1.0);
  const double qn = norm(query);
  if (qn == 0.0) fail(ErrorKind::kZeroVector, "query vector cancels to zero");
  simd::scale(1.0 / qn, query);

  std::vector<std::pair<std::size_t, double>> scored;
  scored.reserve(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (excluded[i]) continue;
    const auto v = e.input(i);
    const double n = norm(v);
    if (n == 0.0) continue;
    scored.emplace_back(i, simd::dot(query, v) / n);
  }
  const std::size_t keep = std::min(top_n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  std::vector<ScoredName> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back({e.vocab()[scored[i].first], scored[i].second});
  return out;
}

std::vector<ScoredName> nearest_neighbors(const EmbeddingMatrix& e, const std::string& name, std::size_t top_n) {
  return analogy_query(e, std::span<const std::string>(&name, 1), {}, top_n);
}

std::string serialize_embeddings(const EmbeddingMatrix& e) {
  std::string out = std::to_string(e.size()) + " " + std::to_string(e.dim()) + "\n";
  for (std::size_t i = 0; i < e.size(); ++i) {
    out += escape_token(e.vocab()[i]);
    for (double v : e.input(i)) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

EmbeddingMatrix parse_embeddings(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorKind::kFormatError, "embedding file is empty");
  const auto header = split(lines[0], ' ');
  const auto rows = header.size() == 2 ? parse_int(header[0]) : std::nullopt;
  const auto dim = header.size() == 2 ? parse_int(header[1]) : std::nullopt;
  if (!rows || !dim || *rows < 0 || *dim < 1) fail(ErrorKind::kFormatError, "bad embedding header");
  if (lines.size() != static_cast<std::size_t>(*rows) + 1) {
    fail(ErrorKind::kFormatError, "header says " + std::to_string(*rows) + " rows, file has " +
                                      std::to_string(lines.size() - 1));
  }
  std::vector<std::string> vocab;
  std::vector<std::vector<double>> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ' ');
    if (fields.size() != static_cast<std::size_t>(*dim) + 1) {
      fail(ErrorKind::kFormatError, "embedding line " + std::to_string(i + 1) + ": wrong field count");
    }
    auto name = unescape_token(fields[0]);
    if (!name || name->empty()) fail(ErrorKind::kFormatError, "embedding line " + std::to_string(i + 1) + ": bad name");
    vocab.push_back(std::move(*name));
    auto& row = values.emplace_back();
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto v = parse_double(fields[k]);
      if (!v) fail(ErrorKind::kFormatError, "embedding line " + std::to_string(i + 1) + ": bad number");
      row.push_back(*v);
    }
  }
  EmbeddingMatrix e(std::move(vocab), static_cast<std::size_t>(*dim));
  for (std::size_t i = 0; i < values.size(); ++i) std::copy(values[i].begin(), values[i].end(), e.input(i).begin());
  return e;
}

void write_embeddings(const EmbeddingMatrix& e, const std::filesystem::path& path) {
  write_file(path, serialize_embeddings(e));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::kMissingArtifact, path.string());
  return parse_embeddings(read_file(path));
}

}  // namespace relpred
