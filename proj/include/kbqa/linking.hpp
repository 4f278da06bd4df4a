#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbqa/embedding.hpp"
#include "kbqa/errors.hpp"
#include "kbqa/sexpr.hpp"

namespace kbqa {

struct EmptyCatalog : std::runtime_error {
  EmptyCatalog() : std::runtime_error("entity catalog is empty") {}
};
struct EmptyIndex : std::runtime_error {
  EmptyIndex() : std::runtime_error("relation index is empty") {}
};

/// Lowercase, trim, and collapse internal whitespace; the key used for
/// exact surface-name lookup.
std::string normalize_surface(std::string_view s);

struct EntityEntry {
  std::string id;
  std::string name;
  double popularity = 0.0;
};

/// All KB entities with their surface names, a normalized-name lookup table,
/// and a dense index over surface-name embeddings. Immutable after build.
class EntityCatalog {
 public:
  static EntityCatalog build(const std::filesystem::path& entities_tsv,
                             const std::filesystem::path& popularity_tsv,
                             const EmbeddingProvider& embed);
  static EntityCatalog from_entries(std::vector<EntityEntry> entries,
                                    const EmbeddingProvider& embed);
  /// Cache reload: entries and a row-aligned prebuilt vector index.
  static EntityCatalog from_parts(std::vector<EntityEntry> entries,
                                  VectorIndex index);

  const std::vector<EntityEntry>& entries() const { return entries_; }
  const EntityEntry& entry(std::size_t row) const { return entries_[row]; }
  std::size_t size() const { return entries_.size(); }

  /// Rows whose normalized surface name equals the normalized mention.
  const std::vector<std::size_t>* rows_for_name(std::string_view mention) const;

  std::optional<std::string> name_of(const std::string& entity_id) const;

  const VectorIndex& vectors() const { return index_; }

 private:
  EntityCatalog() : index_(0) {}

  std::vector<EntityEntry> entries_;
  std::map<std::string, std::vector<std::size_t>> name_map_;
  std::map<std::string, std::size_t> id_map_;
  VectorIndex index_;
};

/// Dense index over relation identifiers, embedded as raw dotted names.
class RelationIndex {
 public:
  static RelationIndex build(const std::filesystem::path& relations_file,
                             const EmbeddingProvider& embed);
  static RelationIndex from_list(std::vector<std::string> relations,
                                 const EmbeddingProvider& embed);
  /// Cache reload: relation ids and a row-aligned prebuilt vector index.
  static RelationIndex from_parts(std::vector<std::string> relations,
                                  VectorIndex index);

  const std::vector<std::string>& relations() const { return relations_; }
  std::size_t size() const { return relations_.size(); }
  const VectorIndex& vectors() const { return index_; }

 private:
  RelationIndex() : index_(0) {}

  std::vector<std::string> relations_;
  VectorIndex index_;
};

enum class SlotKind { Entity, Relation };

struct Candidate {
  std::string id;
  double score = 0.0;
  std::optional<Orientation> orientation;  // relations only
};

/// Ranked candidates for one mention. Entity slots hold at most m_e ids;
/// relation slots hold at most 2*m_r (each relation in both directions,
/// forward of rank i before reverse of rank i).
struct CandidateSlot {
  std::string mention;
  SlotKind kind = SlotKind::Entity;
  std::vector<Candidate> candidates;
};

/// HARD MATCH first: every entity whose normalized name equals the mention,
/// ranked by popularity (ties by id). Overflow beyond m_e is truncated;
/// shortfall is filled with nearest neighbors from the dense index. Exact
/// matches always outrank dense fills.
CandidateSlot link_entity(const std::string& mention,
                          const EntityCatalog& catalog,
                          const EmbeddingProvider& embed, std::size_t m_e = 15);

/// Top-m_r relations by cosine similarity, each expanded into a forward and
/// a reverse candidate.
CandidateSlot match_relation(const std::string& mention,
                             const RelationIndex& index,
                             const EmbeddingProvider& embed,
                             std::size_t m_r = 100);

}  // namespace kbqa
