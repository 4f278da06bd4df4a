#include "kbqa/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace kbqa {

namespace {

std::uint64_t fnv1a64(std::uint64_t seed, std::string_view data) {
  std::uint64_t h = 14695981039346656037ull ^ seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size() + 2);
  out += ' ';
  bool prev_space = true;
  for (char c : text) {
    char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (std::isspace(static_cast<unsigned char>(lc))) {
      if (!prev_space) out += ' ';
      prev_space = true;
    } else {
      out += lc;
      prev_space = false;
    }
  }
  if (!prev_space) out += ' ';
  return out;  // padded with word boundaries
}

}  // namespace

HashedNgramEmbedder::HashedNgramEmbedder(std::size_t dim, std::uint64_t seed,
                                         std::size_t ngram)
    : dim_(dim), seed_(seed), ngram_(ngram) {
  if (dim_ == 0 || ngram_ == 0)
    throw EmbeddingError("embedder dimension and n-gram size must be positive");
}

std::vector<float> HashedNgramEmbedder::embed(const std::string& text) const {
  std::vector<float> v(dim_, 0.0f);
  std::string norm = normalize_text(text);
  if (norm.size() < ngram_) norm.resize(ngram_, ' ');
  for (std::size_t i = 0; i + ngram_ <= norm.size(); ++i) {
    std::uint64_t h = fnv1a64(seed_, std::string_view(norm).substr(i, ngram_));
    std::size_t bucket = static_cast<std::size_t>(h % dim_);
    float sign = (h >> 63) ? -1.0f : 1.0f;
    v[bucket] += sign;
  }
  return v;
}

float cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size())
    throw EmbeddingError("cosine: dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0f;
  return static_cast<float>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

VectorIndex VectorIndex::from_rows(std::size_t dim, std::vector<std::string> ids,
                                   std::vector<float> data) {
  if (data.size() != ids.size() * dim)
    throw EmbeddingError("vector index rows do not match dimension");
  VectorIndex index(dim);
  index.ids_ = std::move(ids);
  index.data_ = std::move(data);
  return index;
}

void VectorIndex::add(std::string id, std::span<const float> vec) {
  if (vec.size() != dim_) throw EmbeddingError("vector index: dimension mismatch");
  double norm = 0;
  for (float x : vec) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  ids_.push_back(std::move(id));
  data_.reserve(data_.size() + dim_);
  for (float x : vec)
    data_.push_back(norm == 0 ? 0.0f : static_cast<float>(x / norm));
}

std::span<const float> VectorIndex::row(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::vector<VectorIndex::Hit> VectorIndex::top_k(std::span<const float> query,
                                                 std::size_t k) const {
  if (query.size() != dim_)
    throw EmbeddingError("vector index: query dimension mismatch");
  double qnorm = 0;
  for (float x : query) qnorm += static_cast<double>(x) * x;
  qnorm = std::sqrt(qnorm);

  std::vector<Hit> hits;
  hits.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    std::span<const float> r = row(i);
    double dot = 0;
    for (std::size_t j = 0; j < dim_; ++j)
      dot += static_cast<double>(query[j]) * r[j];
    float score = qnorm == 0 ? 0.0f : static_cast<float>(dot / qnorm);
    hits.push_back({ids_[i], score, i});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.score > b.score;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace kbqa
