#include "kbqa/linking.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>

namespace kbqa {

std::string normalize_surface(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool prev_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) prev_space = true;
      continue;
    }
    if (prev_space) out += ' ';
    prev_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

EntityCatalog EntityCatalog::from_entries(std::vector<EntityEntry> entries,
                                          const EmbeddingProvider& embed) {
  EntityCatalog catalog;
  catalog.entries_ = std::move(entries);
  catalog.index_ = VectorIndex(embed.dim());
  for (std::size_t row = 0; row < catalog.entries_.size(); ++row) {
    const EntityEntry& e = catalog.entries_[row];
    if (!catalog.id_map_.emplace(e.id, row).second)
      throw ParseError("duplicate entity id '" + e.id + "'");
    catalog.name_map_[normalize_surface(e.name)].push_back(row);
    catalog.index_.add(e.id, embed.embed(e.name));
  }
  return catalog;
}

EntityCatalog EntityCatalog::from_parts(std::vector<EntityEntry> entries,
                                        VectorIndex index) {
  if (entries.size() != index.size())
    throw ParseError("entity entries do not match vector index rows");
  EntityCatalog catalog;
  catalog.entries_ = std::move(entries);
  catalog.index_ = std::move(index);
  for (std::size_t row = 0; row < catalog.entries_.size(); ++row) {
    const EntityEntry& e = catalog.entries_[row];
    if (!catalog.id_map_.emplace(e.id, row).second)
      throw ParseError("duplicate entity id '" + e.id + "'");
    catalog.name_map_[normalize_surface(e.name)].push_back(row);
  }
  return catalog;
}

EntityCatalog EntityCatalog::build(const std::filesystem::path& entities_tsv,
                                   const std::filesystem::path& popularity_tsv,
                                   const EmbeddingProvider& embed) {
  std::ifstream in(entities_tsv);
  if (!in) throw ParseError("cannot open file", entities_tsv.string(), 0);

  std::vector<EntityEntry> entries;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty())
      throw ParseError("expected 'entity_id<TAB>surface_name'",
                       entities_tsv.string(), line_no);
    if (!seen_ids.insert(fields[0]).second)
      throw ParseError("duplicate entity id '" + fields[0] + "'",
                       entities_tsv.string(), line_no);
    entries.push_back({fields[0], fields[1], 0.0});
  }

  if (!popularity_tsv.empty()) {
    std::ifstream pop(popularity_tsv);
    if (!pop) throw ParseError("cannot open file", popularity_tsv.string(), 0);
    std::map<std::string, double> popularity;
    line_no = 0;
    while (std::getline(pop, line)) {
      ++line_no;
      line = strip_cr(line);
      if (line.empty()) continue;
      auto fields = split_tabs(line);
      double value = 0;
      if (fields.size() != 2 ||
          std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(),
                          value)
                  .ec != std::errc{} ||
          value < 0)
        throw ParseError("expected 'entity_id<TAB>popularity'",
                         popularity_tsv.string(), line_no);
      popularity[fields[0]] = value;
    }
    for (EntityEntry& e : entries) {
      auto it = popularity.find(e.id);
      if (it != popularity.end()) e.popularity = it->second;
    }
  }

  return from_entries(std::move(entries), embed);
}

const std::vector<std::size_t>* EntityCatalog::rows_for_name(
    std::string_view mention) const {
  auto it = name_map_.find(normalize_surface(mention));
  return it == name_map_.end() ? nullptr : &it->second;
}

std::optional<std::string> EntityCatalog::name_of(
    const std::string& entity_id) const {
  auto it = id_map_.find(entity_id);
  if (it == id_map_.end()) return std::nullopt;
  return entries_[it->second].name;
}

RelationIndex RelationIndex::from_list(std::vector<std::string> relations,
                                       const EmbeddingProvider& embed) {
  RelationIndex index;
  index.relations_ = std::move(relations);
  index.index_ = VectorIndex(embed.dim());
  std::set<std::string> seen;
  for (const std::string& rel : index.relations_) {
    if (rel.empty() || !seen.insert(rel).second)
      throw ParseError("empty or duplicate relation id '" + rel + "'");
    index.index_.add(rel, embed.embed(rel));
  }
  return index;
}

RelationIndex RelationIndex::from_parts(std::vector<std::string> relations,
                                        VectorIndex index) {
  if (relations.size() != index.size())
    throw ParseError("relation list does not match vector index rows");
  RelationIndex out;
  out.relations_ = std::move(relations);
  out.index_ = std::move(index);
  return out;
}

RelationIndex RelationIndex::build(const std::filesystem::path& relations_file,
                                   const EmbeddingProvider& embed) {
  std::ifstream in(relations_file);
  if (!in) throw ParseError("cannot open file", relations_file.string(), 0);
  std::vector<std::string> relations;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (!line.empty()) relations.push_back(line);
  }
  return from_list(std::move(relations), embed);
}

CandidateSlot link_entity(const std::string& mention,
                          const EntityCatalog& catalog,
                          const EmbeddingProvider& embed, std::size_t m_e) {
  if (catalog.size() == 0) throw EmptyCatalog();

  CandidateSlot slot{mention, SlotKind::Entity, {}};
  std::set<std::string> used;

  // Exact-name candidates, most popular first.
  if (const auto* rows = catalog.rows_for_name(mention)) {
    std::vector<std::size_t> sorted(*rows);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [&](std::size_t a, std::size_t b) {
                       const EntityEntry& ea = catalog.entry(a);
                       const EntityEntry& eb = catalog.entry(b);
                       if (ea.popularity != eb.popularity)
                         return ea.popularity > eb.popularity;
                       return ea.id < eb.id;
                     });
    for (std::size_t row : sorted) {
      if (slot.candidates.size() >= m_e) break;
      const EntityEntry& e = catalog.entry(row);
      slot.candidates.push_back({e.id, e.popularity, std::nullopt});
      used.insert(e.id);
    }
  }

  // Shortfall is filled from the dense index, nearest first.
  if (slot.candidates.size() < m_e) {
    auto hits = catalog.vectors().top_k(embed.embed(mention), catalog.size());
    for (const auto& hit : hits) {
      if (slot.candidates.size() >= m_e) break;
      if (used.count(hit.id)) continue;
      slot.candidates.push_back({hit.id, hit.score, std::nullopt});
      used.insert(hit.id);
    }
  }
  return slot;
}

CandidateSlot match_relation(const std::string& mention,
                             const RelationIndex& index,
                             const EmbeddingProvider& embed, std::size_t m_r) {
  if (index.size() == 0) throw EmptyIndex();

  CandidateSlot slot{mention, SlotKind::Relation, {}};
  auto hits = index.vectors().top_k(embed.embed(mention), m_r);
  slot.candidates.reserve(hits.size() * 2);
  for (const auto& hit : hits) {
    slot.candidates.push_back({hit.id, hit.score, Orientation::Forward});
    slot.candidates.push_back({hit.id, hit.score, Orientation::Reverse});
  }
  return slot;
}

}  // namespace kbqa
