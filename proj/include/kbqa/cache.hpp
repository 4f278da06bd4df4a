#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "kbqa/linking.hpp"
#include "kbqa/prompt.hpp"

namespace kbqa {

std::string fnv1a64_hex(std::string_view data);
std::string file_checksum(const std::filesystem::path& path);

struct BuiltIndexes {
  EntityCatalog catalog;
  RelationIndex relations;
  std::vector<TrainingPair> train_pool;
  bool rebuilt = false;  // false when every artifact was loaded from cache
};

struct IndexSources {
  std::filesystem::path entities;
  std::filesystem::path popularity;  // optional, may be empty
  std::filesystem::path relations;
  std::filesystem::path train_pool;  // optional, may be empty
};

/// Builds the entity catalog, relation index, and training pool, caching
/// embedded vectors under cache_dir. A cache is reused only when the
/// manifest's source checksums, embedder parameters, and artifact checksums
/// all verify; any mismatch (including a corrupted artifact) triggers a
/// full rebuild.
BuiltIndexes build_or_load_indexes(const IndexSources& sources,
                                   const std::filesystem::path& cache_dir,
                                   const EmbeddingProvider& embed);

/// Uncached variant reading straight from the source files.
BuiltIndexes build_indexes(const IndexSources& sources,
                           const EmbeddingProvider& embed);

}  // namespace kbqa
