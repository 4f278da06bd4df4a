#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbqa {

struct EmbeddingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Text-to-vector interface. Implementations must be deterministic per
/// instance and safe for concurrent embed calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<float> embed(const std::string& text) const = 0;
  virtual std::size_t dim() const = 0;
};

/// Deterministic signed feature-hash of lowercased character n-grams.
/// Strings sharing substrings share hash buckets, which is enough structure
/// for exact-cosine retrieval over names at fixture scale.
class HashedNgramEmbedder final : public EmbeddingProvider {
 public:
  explicit HashedNgramEmbedder(std::size_t dim = 256,
                               std::uint64_t seed = 0x6b627161,
                               std::size_t ngram = 3);

  std::vector<float> embed(const std::string& text) const override;
  std::size_t dim() const override { return dim_; }

  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::size_t ngram_;
};

float cosine(std::span<const float> a, std::span<const float> b);

/// Exact inner-product index over unit-normalized vectors. Ranking ties are
/// broken by insertion order, so results are fully deterministic.
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dim) : dim_(dim) {}

  void add(std::string id, std::span<const float> vec);

  /// Reassembles an index from previously serialized rows, trusting that
  /// they are already normalized (bit-exact cache reload).
  static VectorIndex from_rows(std::size_t dim, std::vector<std::string> ids,
                               std::vector<float> data);

  struct Hit {
    std::string id;
    float score;
    std::size_t row;
  };

  std::vector<Hit> top_k(std::span<const float> query, std::size_t k) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<float>& data() const { return data_; }
  std::span<const float> row(std::size_t i) const;

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> data_;  // row-major, normalized
};

}  // namespace kbqa
