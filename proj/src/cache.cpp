#include "kbqa/cache.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace kbqa {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string fnv1a64_hex(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a64_hex(buffer.str());
}

namespace {

constexpr int kCacheVersion = 1;

struct ArtifactNames {
  static constexpr const char* manifest = "manifest.json";
  static constexpr const char* entities = "entities.cache.json";
  static constexpr const char* relations = "relations.cache.json";
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << data))
    throw ParseError("cannot write cache file", path.string(), 0);
}

std::string serialize_entities(const EntityCatalog& catalog) {
  ordered_json doc;
  ordered_json entries = ordered_json::array();
  for (const EntityEntry& e : catalog.entries())
    entries.push_back({{"id", e.id}, {"name", e.name}, {"pop", e.popularity}});
  doc["entries"] = std::move(entries);
  doc["dim"] = catalog.vectors().dim();
  doc["vectors"] = catalog.vectors().data();
  return doc.dump();
}

std::string serialize_relations(const RelationIndex& index) {
  ordered_json doc;
  doc["relations"] = index.relations();
  doc["dim"] = index.vectors().dim();
  doc["vectors"] = index.vectors().data();
  return doc.dump();
}

EntityCatalog deserialize_entities(const std::string& text) {
  json doc = json::parse(text);
  std::vector<EntityEntry> entries;
  for (const json& row : doc.at("entries"))
    entries.push_back({row.at("id").get<std::string>(),
                       row.at("name").get<std::string>(),
                       row.at("pop").get<double>()});
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const EntityEntry& e : entries) ids.push_back(e.id);
  VectorIndex index = VectorIndex::from_rows(
      doc.at("dim").get<std::size_t>(), std::move(ids),
      doc.at("vectors").get<std::vector<float>>());
  return EntityCatalog::from_parts(std::move(entries), std::move(index));
}

RelationIndex deserialize_relations(const std::string& text) {
  json doc = json::parse(text);
  auto relations = doc.at("relations").get<std::vector<std::string>>();
  std::vector<std::string> ids = relations;
  VectorIndex index = VectorIndex::from_rows(
      doc.at("dim").get<std::size_t>(), std::move(ids),
      doc.at("vectors").get<std::vector<float>>());
  return RelationIndex::from_parts(std::move(relations), std::move(index));
}

json source_fingerprint(const IndexSources& sources,
                        const EmbeddingProvider& embed) {
  json doc;
  doc["version"] = kCacheVersion;
  doc["embed_dim"] = embed.dim();
  // A probe embedding fingerprints the provider (seed, algorithm) without
  // the provider having to expose its parameters.
  std::vector<float> probe = embed.embed("cache fingerprint probe");
  doc["embed_probe"] = fnv1a64_hex(std::string_view(
      reinterpret_cast<const char*>(probe.data()), probe.size() * sizeof(float)));
  doc["entities"] = {{"path", sources.entities.string()},
                     {"checksum", file_checksum(sources.entities)}};
  doc["popularity"] = {{"path", sources.popularity.string()},
                       {"checksum", file_checksum(sources.popularity)}};
  doc["relations"] = {{"path", sources.relations.string()},
                      {"checksum", file_checksum(sources.relations)}};
  doc["train_pool"] = {{"path", sources.train_pool.string()},
                       {"checksum", file_checksum(sources.train_pool)}};
  return doc;
}

}  // namespace

BuiltIndexes build_indexes(const IndexSources& sources,
                           const EmbeddingProvider& embed) {
  BuiltIndexes built{
      EntityCatalog::build(sources.entities, sources.popularity, embed),
      RelationIndex::build(sources.relations, embed),
      {},
      true};
  if (!sources.train_pool.empty())
    built.train_pool = load_training_pairs(sources.train_pool);
  return built;
}

BuiltIndexes build_or_load_indexes(const IndexSources& sources,
                                   const std::filesystem::path& cache_dir,
                                   const EmbeddingProvider& embed) {
  namespace fs = std::filesystem;
  if (cache_dir.empty()) return build_indexes(sources, embed);

  fs::create_directories(cache_dir);
  const fs::path manifest_path = cache_dir / ArtifactNames::manifest;
  const fs::path entities_path = cache_dir / ArtifactNames::entities;
  const fs::path relations_path = cache_dir / ArtifactNames::relations;

  const json wanted = source_fingerprint(sources, embed);

  // Try a verified load first.
  if (fs::exists(manifest_path)) {
    json manifest = json::parse(read_file(manifest_path), nullptr, false);
    if (!manifest.is_discarded() && manifest.value("sources", json{}) == wanted) {
      std::string entities_blob = read_file(entities_path);
      std::string relations_blob = read_file(relations_path);
      bool artifacts_ok =
          manifest.value("entities_checksum", "") == fnv1a64_hex(entities_blob) &&
          manifest.value("relations_checksum", "") == fnv1a64_hex(relations_blob);
      if (artifacts_ok) {
        try {
          BuiltIndexes built{deserialize_entities(entities_blob),
                             deserialize_relations(relations_blob),
                             {},
                             false};
          if (!sources.train_pool.empty())
            built.train_pool = load_training_pairs(sources.train_pool);
          return built;
        } catch (const std::exception&) {
          // fall through to rebuild
        }
      }
    }
  }

  BuiltIndexes built = build_indexes(sources, embed);
  const std::string entities_blob = serialize_entities(built.catalog);
  const std::string relations_blob = serialize_relations(built.relations);
  write_file(entities_path, entities_blob);
  write_file(relations_path, relations_blob);

  json manifest;
  manifest["sources"] = wanted;
  manifest["entities_checksum"] = fnv1a64_hex(entities_blob);
  manifest["relations_checksum"] = fnv1a64_hex(relations_blob);
  write_file(manifest_path, manifest.dump(2) + "\n");
  return built;
}

}  // namespace kbqa
