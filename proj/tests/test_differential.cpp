#include <doctest.h>

#include <filesystem>
#include <random>
#include <set>
#include <vector>

#include "kbqa/callseq.hpp"
#include "kbqa/kb.hpp"
#include "kbqa/sparql.hpp"
#include "minisparql.hpp"

using namespace kbqa;

namespace {

const std::filesystem::path kFixtures{KBQA_FIXTURE_DIR};

const TripleStore& store() {
  static TripleStore s = TripleStore::load(kFixtures / "kb_triples.tsv");
  return s;
}

// Random grounded expressions drawn from the fixture KB's own vocabulary,
// so joins and comparisons regularly hit real data instead of being
// vacuously empty.
class GroundedGenerator {
 public:
  explicit GroundedGenerator(std::uint64_t seed) : gen_(seed) {
    std::set<std::string> entity_ids, relation_ids;
    std::set<std::pair<std::string, Datatype>> literal_values;
    for (const Triple& t : store().triples()) {
      entity_ids.insert(t.head);
      relation_ids.insert(t.relation);
      if (t.tail_type)
        literal_values.insert({t.tail, *t.tail_type});
      else
        entity_ids.insert(t.tail);
    }
    entities_.assign(entity_ids.begin(), entity_ids.end());
    relations_.assign(relation_ids.begin(), relation_ids.end());
    literals_.assign(literal_values.begin(), literal_values.end());
  }

  SExprPtr generate() {
    if (pick(6) == 0) return make_count(gen_set(1));
    return gen_set(0);
  }

 private:
  std::uint64_t pick(std::uint64_t n) { return gen_() % n; }

  RelRef relation() {
    return {relations_[pick(relations_.size())],
            pick(2) ? Orientation::Reverse : Orientation::Forward};
  }

  SExprPtr literal() {
    auto [text, type] = literals_[pick(literals_.size())];
    // occasionally nudge numeric values so strict and non-strict operators
    // disagree on the boundary
    if (type == Datatype::Integer && pick(2))
      text = std::to_string(std::stoll(text) + (pick(2) ? 1 : -1));
    return make_literal(text, type);
  }

  SExprPtr gen_set(int depth) {
    if (depth >= 4 || pick(3) == 0)
      return make_entity(entities_[pick(entities_.size())]);
    switch (pick(6)) {
      case 0:
        return make_entity(entities_[pick(entities_.size())]);
      case 1:
      case 2:
        return make_join(relation(), gen_set(depth + 1));
      case 3:
        return make_and(gen_set(depth + 1), gen_set(depth + 1));
      case 4:
        return make_cmp(static_cast<CmpOp>(pick(4)), relation(), literal());
      default:
        return make_arg(pick(2) ? ArgOp::Max : ArgOp::Min, gen_set(depth + 1),
                        relation());
    }
  }

  std::mt19937_64 gen_;
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::vector<std::pair<std::string, Datatype>> literals_;
};

std::set<std::string> engine_items(const minisparql::Result& result) {
  std::set<std::string> out;
  for (const auto& v : result.rows) out.insert(v.text);
  return out;
}

}  // namespace

TEST_CASE("direct evaluation matches compiled-query execution on random trees") {
  GroundedGenerator gen(0xd1ff);
  int compared = 0, nonempty = 0, arg_empty = 0;
  for (int i = 0; i < 700; ++i) {
    SExprPtr expr = gen.generate();
    std::string query = compile_sparql(*expr);
    CAPTURE(print_sexpr(expr));
    CAPTURE(query);

    minisparql::Result engine = minisparql::run_query(query, store());
    try {
      Denotation direct = eval_direct(*expr, store());
      if (direct.is_count()) {
        REQUIRE(engine.count.has_value());
        CHECK(*engine.count == *direct.count);
      } else {
        CHECK(engine_items(engine) == direct.items);
        if (!direct.items.empty()) ++nonempty;
      }
    } catch (const EvalError& e) {
      // an extremum over an empty operand has no rows on the query side
      REQUIRE(e.kind == EvalError::Kind::ArgOverEmptySet);
      CHECK((engine.count ? *engine.count == 0 : engine.rows.empty()));
      ++arg_empty;
    }
    ++compared;
  }
  CHECK(compared == 700);
  // the generator must exercise satisfiable queries, not just vacuous ones
  CHECK(nonempty > 100);
  CHECK(arg_empty > 0);
}

TEST_CASE("compiled queries re-run identically through the endpoint engine") {
  GroundedGenerator gen(0xfeed);
  for (int i = 0; i < 50; ++i) {
    SExprPtr expr = gen.generate();
    std::string a = compile_sparql(*expr);
    std::string b = compile_sparql(*expr);
    CHECK(a == b);
  }
}

TEST_CASE("check_format never throws, whatever bytes arrive") {
  std::mt19937_64 gen(0xcafe);
  const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyz()'\",=_ \t\n0123456789STARTJOINANDCMP";
  for (int i = 0; i < 500; ++i) {
    std::string noise;
    std::size_t len = gen() % 200;
    for (std::size_t j = 0; j < len; ++j)
      noise += alphabet[gen() % alphabet.size()];
    FormatVerdict verdict = check_format(noise);
    if (!verdict.ok) CHECK(verdict.reason.has_value());
  }

  // mutated valid programs stay total too
  const std::string valid =
      "expression = START('x')\n"
      "expression = JOIN('r', expression)\n"
      "expression = STOP(expression)\n";
  for (int i = 0; i < 300; ++i) {
    std::string mutated = valid;
    std::size_t pos = gen() % mutated.size();
    mutated[pos] = alphabet[gen() % alphabet.size()];
    (void)check_format(mutated);
  }
}
