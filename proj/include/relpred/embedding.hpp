#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relpred {

// Row-major |V| x d input (published) and output (context) vectors.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::vector<std::string> vocab, std::size_t dim);

  std::size_t size() const { return vocab_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  std::optional<std::size_t> find(std::string_view name) const;
  // Throws kUnknownName.
  std::size_t index_of(std::string_view name) const;

  std::span<const double> input(std::size_t row) const { return {input_.data() + row * dim_, dim_}; }
  std::span<double> input(std::size_t row) { return {input_.data() + row * dim_, dim_}; }
  std::span<const double> output(std::size_t row) const { return {output_.data() + row * dim_, dim_}; }
  std::span<double> output(std::size_t row) { return {output_.data() + row * dim_, dim_}; }

  std::span<const double> input_data() const { return input_; }
  std::span<double> input_data() { return input_; }
  std::span<double> output_data() { return output_; }

  // Published vector for a name. Throws kUnknownName.
  std::span<const double> vector(std::string_view name) const { return input(index_of(name)); }

  bool operator==(const EmbeddingMatrix& other) const = default;

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dim_ = 0;
  std::vector<double> input_;
  std::vector<double> output_;
};

// Cosine of the published vectors. Throws kUnknownName, kZeroVector.
double cosine_similarity(const EmbeddingMatrix& e, std::string_view a, std::string_view b);

struct ScoredName {
  std::string name;
  double score;
};

// Ranks every vocabulary entry except the query terms by cosine to the
// normalized sum of positive unit vectors minus negative unit vectors.
// Throws kEmptyQuery, kUnknownName, kZeroVector.
std::vector<ScoredName> analogy_query(const EmbeddingMatrix& e, std::span<const std::string> positive,
                                      std::span<const std::string> negative, std::size_t top_n);
std::vector<ScoredName> nearest_neighbors(const EmbeddingMatrix& e, const std::string& name, std::size_t top_n);

// Text format: "|V| d" header, then "name v1 ... vd" per row. Only the
// published (input) vectors are stored; output vectors load as zero.
std::string serialize_embeddings(const EmbeddingMatrix& e);
EmbeddingMatrix parse_embeddings(std::string_view text);
void write_embeddings(const EmbeddingMatrix& e, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

}  // namespace relpred
