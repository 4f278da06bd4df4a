#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "kbqa/linking.hpp"

using namespace kbqa;

namespace {

const std::filesystem::path kFixtures{KBQA_FIXTURE_DIR};

const HashedNgramEmbedder& embedder() {
  static HashedNgramEmbedder e;
  return e;
}

EntityCatalog homonym_catalog() {
  // 20 same-name entities with distinct popularity plus 30 distractors.
  std::vector<EntityEntry> entries;
  for (int i = 0; i < 20; ++i)
    entries.push_back({"m.h" + std::to_string(i), "Springfield",
                       static_cast<double>((i * 7) % 20) + 1.0});
  for (int i = 0; i < 30; ++i)
    entries.push_back({"m.d" + std::to_string(i),
                       "distractor town " + std::to_string(i), 0.5});
  return EntityCatalog::from_entries(std::move(entries), embedder());
}

}  // namespace

TEST_CASE("embedding is deterministic and self-similar") {
  auto a = embedder().embed("abc");
  auto b = embedder().embed("abc");
  CHECK(a == b);
  CHECK(cosine(a, b) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("n-gram embedding puts related strings closer than unrelated") {
  auto base = embedder().embed("nationality");
  CHECK(cosine(base, embedder().embed("nationality of person")) >
        cosine(base, embedder().embed("zip code")));
  auto height = embedder().embed("person height meters");
  CHECK(cosine(height, embedder().embed("people.person.height_meters")) >
        cosine(height, embedder().embed("location.statistical_region.population")));
}

TEST_CASE("normalize_surface lowercases and collapses whitespace") {
  CHECK(normalize_surface("  united   States of AMERICA ") ==
        "united states of america");
  CHECK(normalize_surface("x") == "x");
  CHECK(normalize_surface("") == "");
}

TEST_CASE("hard match first, then popularity, then dense fill") {
  std::vector<EntityEntry> entries{
      {"m.big", "Phoenix", 10.0},
      {"m.small", "Phoenix", 2.0},
      {"m.other", "Phoenix Lights", 99.0},
      {"m.far", "zebra crossing", 99.0},
  };
  auto catalog = EntityCatalog::from_entries(entries, embedder());
  CandidateSlot slot = link_entity("phoenix", catalog, embedder(), 3);
  REQUIRE(slot.candidates.size() == 3);
  CHECK(slot.candidates[0].id == "m.big");
  CHECK(slot.candidates[1].id == "m.small");
  // dense fill prefers the lexically closer name over the unrelated one
  CHECK(slot.candidates[2].id == "m.other");
}

TEST_CASE("mention missing from the catalog yields pure dense fill") {
  auto catalog = homonym_catalog();
  CandidateSlot slot = link_entity("springfeld", catalog, embedder(), 5);
  CHECK(slot.candidates.size() == 5);
}

TEST_CASE("homonym overflow keeps exactly the most popular m_e") {
  auto catalog = homonym_catalog();
  CandidateSlot slot = link_entity("Springfield", catalog, embedder(), 15);
  REQUIRE(slot.candidates.size() == 15);

  // brute-force oracle: sort all same-name rows by (popularity desc, id asc)
  std::vector<const EntityEntry*> oracle;
  for (const EntityEntry& e : catalog.entries())
    if (normalize_surface(e.name) == "springfield") oracle.push_back(&e);
  std::sort(oracle.begin(), oracle.end(),
            [](const EntityEntry* a, const EntityEntry* b) {
              if (a->popularity != b->popularity)
                return a->popularity > b->popularity;
              return a->id < b->id;
            });
  for (std::size_t i = 0; i < 15; ++i)
    CHECK(slot.candidates[i].id == oracle[i]->id);
}

TEST_CASE("link_entity returns min(m_e, catalog size) distinct candidates") {
  auto catalog = homonym_catalog();
  for (std::size_t m_e : {std::size_t{1}, std::size_t{15}, std::size_t{50},
                          std::size_t{80}}) {
    CandidateSlot slot = link_entity("Springfield", catalog, embedder(), m_e);
    CHECK(slot.candidates.size() == std::min<std::size_t>(m_e, catalog.size()));
    std::set<std::string> ids;
    for (const Candidate& c : slot.candidates) ids.insert(c.id);
    CHECK(ids.size() == slot.candidates.size());
  }
  CHECK_THROWS_AS(
      link_entity("x", EntityCatalog::from_entries({}, embedder()), embedder(), 3),
      EmptyCatalog);
}

TEST_CASE("match_relation agrees with a brute-force cosine scan") {
  auto index = RelationIndex::build(kFixtures / "kb_relations.txt", embedder());
  const std::string mention = "nationality";
  CandidateSlot slot = match_relation(mention, index, embedder(), 5);
  REQUIRE(slot.candidates.size() == 10);  // both orientations

  auto query = embedder().embed(mention);
  std::vector<std::pair<float, std::string>> oracle;
  for (const std::string& rel : index.relations())
    oracle.push_back({cosine(query, embedder().embed(rel)), rel});
  std::stable_sort(oracle.begin(), oracle.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  for (std::size_t rank = 0; rank < 5; ++rank) {
    CHECK(slot.candidates[2 * rank].id == oracle[rank].second);
    CHECK(slot.candidates[2 * rank].orientation == Orientation::Forward);
    CHECK(slot.candidates[2 * rank + 1].id == oracle[rank].second);
    CHECK(slot.candidates[2 * rank + 1].orientation == Orientation::Reverse);
    CHECK(slot.candidates[2 * rank].score ==
          doctest::Approx(oracle[rank].first).epsilon(1e-6));
  }
  CHECK(slot.candidates[0].id == "people.person.nationality");
}

TEST_CASE("match_relation saturates when m_r exceeds the index") {
  auto index = RelationIndex::from_list({"a.b.c", "d.e.f"}, embedder());
  CandidateSlot slot = match_relation("anything", index, embedder(), 100);
  CHECK(slot.candidates.size() == 4);
  CHECK_THROWS_AS(
      match_relation("x", RelationIndex::from_list({}, embedder()), embedder(), 3),
      EmptyIndex);
}

TEST_CASE("a mention equal to a relation's text ranks first with similarity 1") {
  auto index = RelationIndex::build(kFixtures / "kb_relations.txt", embedder());
  CandidateSlot slot =
      match_relation("people.person.nationality", index, embedder(), 3);
  CHECK(slot.candidates[0].id == "people.person.nationality");
  CHECK(slot.candidates[0].score == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("build_catalog reads the fixture files") {
  auto catalog = EntityCatalog::build(kFixtures / "kb_entities.tsv",
                                      kFixtures / "kb_popularity.tsv", embedder());
  CHECK(catalog.size() == 55);
  CHECK(catalog.name_of("m.0usa") == "United States of America");
  CHECK_FALSE(catalog.name_of("m.missing").has_value());

  // popularity file omits the type entities; they default to zero
  for (const EntityEntry& e : catalog.entries())
    if (e.id == "m.0tperson") CHECK(e.popularity == 0.0);

  // catalog vectors match per-name recomputation
  for (std::size_t row = 0; row < catalog.size(); ++row) {
    auto fresh = embedder().embed(catalog.entry(row).name);
    CHECK(cosine(fresh, catalog.vectors().row(row)) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("duplicate entity ids are a parse error") {
  auto dir = std::filesystem::temp_directory_path() / "kbqa_linking_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "dup.tsv");
    out << "m.1\tAlpha\nm.1\tBeta\n";
  }
  CHECK_THROWS_AS(EntityCatalog::build(dir / "dup.tsv", "", embedder()),
                  ParseError);
  {
    std::ofstream out(dir / "bad.tsv");
    out << "m.1\n";
  }
  CHECK_THROWS_AS(EntityCatalog::build(dir / "bad.tsv", "", embedder()),
                  ParseError);
  CHECK_THROWS_AS(EntityCatalog::build(dir / "missing.tsv", "", embedder()),
                  ParseError);
}
