#include <doctest.h>

#include "generators.hpp"
#include "kbqa/sexpr.hpp"

using namespace kbqa;

namespace {

const char* kPresentersMids =
    "(COUNT (AND (JOIN nationality m.09c7w0) (JOIN profession m.015cjr)))";

}  // namespace

TEST_CASE("parse builds the count-and-join tree") {
  SExprPtr e = parse_sexpr(kPresentersMids);
  const auto* count = e->get_if<Count>();
  REQUIRE(count);
  const auto* and_node = count->sub->get_if<And>();
  REQUIRE(and_node);
  const auto* left = and_node->lhs->get_if<Join>();
  REQUIRE(left);
  CHECK(left->relation.name == "nationality");
  CHECK(left->sub->get_if<EntityRef>()->name == "m.09c7w0");
  const auto* right = and_node->rhs->get_if<Join>();
  REQUIRE(right);
  CHECK(right->relation.name == "profession");
  CHECK(right->sub->get_if<EntityRef>()->name == "m.015cjr");
}

TEST_CASE("parse of an atomic expression yields an entity") {
  SExprPtr e = parse_sexpr("m.09c7w0");
  REQUIRE(e->is<EntityRef>());
  CHECK(e->get_if<EntityRef>()->name == "m.09c7w0");
}

TEST_CASE("JOIN over a number-typed child is a type error") {
  CHECK_THROWS_AS(parse_sexpr("(JOIN (COUNT m.1))"), TypeError);
  CHECK_THROWS_AS(parse_sexpr("(JOIN r (COUNT m.1))"), TypeError);
}

TEST_CASE("syntax errors: parens, heads, arity") {
  CHECK_THROWS_AS(parse_sexpr("(COUNT (AND a b)"), SyntaxError);
  CHECK_THROWS_AS(parse_sexpr("(FROB a b)"), SyntaxError);
  CHECK_THROWS_AS(parse_sexpr("(JOIN r)"), SyntaxError);
  CHECK_THROWS_AS(parse_sexpr("(AND a b c)"), SyntaxError);
  CHECK_THROWS_AS(parse_sexpr(""), SyntaxError);
  CHECK_THROWS_AS(parse_sexpr("a b"), SyntaxError);
}

TEST_CASE("whitespace between tokens is insignificant") {
  SExprPtr a = parse_sexpr(kPresentersMids);
  SExprPtr b = parse_sexpr(
      "(COUNT\n  (AND\t(JOIN nationality\n m.09c7w0)  (JOIN profession "
      "m.015cjr)))");
  CHECK(equal(a, b));
}

TEST_CASE("print produces the canonical single-space form") {
  SExprPtr e = parse_sexpr(kPresentersMids);
  CHECK(print_sexpr(e) == kPresentersMids);
  CHECK(print_sexpr(make_entity("m.015cjr")) == "m.015cjr");
}

TEST_CASE("canonical literals carry a datatype tag") {
  SExprPtr e = make_cmp(CmpOp::Ge, RelRef{"height"},
                        make_literal("2.0", Datatype::Float));
  CHECK(print_sexpr(e) == "(>= height 2.0^^float)");
  CHECK(equal(parse_sexpr("(>= height 2.0^^float)"), e));
  // bare numerics are accepted on parse
  CHECK(equal(parse_sexpr("(>= height 2.0)"), e));
}

TEST_CASE("reverse relation orientation round-trips through the marker") {
  SExprPtr e = make_join(RelRef{"location.containedby", Orientation::Reverse},
                         make_entity("m.0nyc"));
  CHECK(print_sexpr(e) == "(JOIN ^location.containedby m.0nyc)");
  CHECK(equal(parse_sexpr(print_sexpr(e)), e));
}

TEST_CASE("quoted names cover spaces, quotes, and numeric-looking text") {
  for (const char* name :
       {"united States of America", "it's \"fine\"", "42", "^caret", "a b  c"}) {
    SExprPtr e = make_join(RelRef{"r"}, make_entity(name));
    SExprPtr back = parse_sexpr(print_sexpr(e));
    CHECK(equal(back, e));
  }
}

TEST_CASE("validate_types accepts count over set and flags inversions") {
  SExprPtr ok = make_count(make_join(RelRef{"r"}, make_entity("e")));
  CHECK(validate_types(*ok).empty());

  SExpr bad_join{Join{RelRef{"r"}, make_count(make_entity("e"))}};
  auto violations = validate_types(bad_join);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].path == "/sub");
  CHECK(violations[0].constraint.find("set-typed") != std::string::npos);

  SExpr bad_arg{Arg{ArgOp::Max, make_count(make_entity("e")), RelRef{"r"}}};
  violations = validate_types(bad_arg);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].constraint.find("set-typed") != std::string::npos);
}

TEST_CASE("validate_types reports every violation with its path") {
  SExpr e{And{make_count(make_entity("a")), make_count(make_entity("b"))}};
  auto violations = validate_types(e);
  REQUIRE(violations.size() == 2);
  CHECK(violations[0].path == "/lhs");
  CHECK(violations[1].path == "/rhs");
}

TEST_CASE("literal roots and empty relation names are violations") {
  SExpr lit{LiteralVal{"5", Datatype::Integer}};
  CHECK_FALSE(validate_types(lit).empty());
  SExpr join{Join{RelRef{""}, make_entity("e")}};
  CHECK_FALSE(validate_types(join).empty());
}

TEST_CASE("collect_mentions walks in printed order") {
  SExprPtr e = parse_sexpr(
      "(COUNT (AND (JOIN nationality \"united States of America\") "
      "(JOIN profession presenter)))");
  Mentions m = collect_mentions(*e);
  REQUIRE(m.entities.size() == 2);
  CHECK(m.entities[0].text == "united States of America");
  CHECK(m.entities[1].text == "presenter");
  REQUIRE(m.relations.size() == 2);
  CHECK(m.relations[0].text == "nationality");
  CHECK(m.relations[1].text == "profession");
}

TEST_CASE("collect_mentions on an atom; literals are not mentions") {
  Mentions m = collect_mentions(*make_entity("x"));
  REQUIRE(m.entities.size() == 1);
  CHECK(m.entities[0].text == "x");
  CHECK(m.relations.empty());

  SExprPtr cmp = parse_sexpr("(> population 5)");
  Mentions cm = collect_mentions(*cmp);
  CHECK(cm.entities.empty());
  REQUIRE(cm.relations.size() == 1);
  CHECK(cm.relations[0].text == "population");
}

TEST_CASE("collect_mentions matches the generator's construction order") {
  testsupport::ExprGenerator gen(42, {.max_depth = 6, .allow_reverse = true,
                                      .quirky_names = true});
  for (int i = 0; i < 500; ++i) {
    testsupport::GeneratedExpr g = gen.generate();
    Mentions m = collect_mentions(*g.expr);
    REQUIRE(m.entities.size() == g.entity_mentions.size());
    REQUIRE(m.relations.size() == g.relation_mentions.size());
    for (std::size_t j = 0; j < m.entities.size(); ++j)
      CHECK(m.entities[j].text == g.entity_mentions[j]);
    for (std::size_t j = 0; j < m.relations.size(); ++j)
      CHECK(m.relations[j].text == g.relation_mentions[j]);
  }
}

TEST_CASE("print/parse round-trip holds on random well-typed trees") {
  testsupport::ExprGenerator gen(7, {.max_depth = 6, .allow_reverse = true,
                                     .quirky_names = true});
  for (int i = 0; i < 1000; ++i) {
    testsupport::GeneratedExpr g = gen.generate();
    CAPTURE(print_sexpr(g.expr));
    SExprPtr back = parse_sexpr(print_sexpr(g.expr));
    CHECK(equal(back, g.expr));
    CHECK(validate_types(*g.expr).empty());
  }
}

TEST_CASE("substitute_mentions replaces exactly the mention positions") {
  SExprPtr e = parse_sexpr("(AND (JOIN r1 alpha) (JOIN r2 beta))");
  SExprPtr grounded = substitute_mentions(
      *e, {"m.1", "m.2"},
      {{"people.r1", Orientation::Forward}, {"people.r2", Orientation::Reverse}});
  CHECK(print_sexpr(grounded) == "(AND (JOIN people.r1 m.1) (JOIN ^people.r2 m.2))");
  CHECK_THROWS_AS(substitute_mentions(*e, {"m.1"}, {}), std::invalid_argument);
}

TEST_CASE("map_entity_names rewrites only mapped identifiers") {
  SExprPtr e = parse_sexpr("(JOIN nationality m.09c7w0)");
  SExprPtr mapped = map_entity_names(*e, [](const std::string& id) {
    return id == "m.09c7w0" ? std::optional<std::string>("united States of America")
                            : std::nullopt;
  });
  CHECK(print_sexpr(mapped) ==
        "(JOIN nationality \"united States of America\")");
}

TEST_CASE("looks_like_mid recognizes identifier prefixes") {
  CHECK(looks_like_mid("m.09c7w0"));
  CHECK(looks_like_mid("g.11x"));
  CHECK_FALSE(looks_like_mid("presenter"));
  CHECK_FALSE(looks_like_mid("m."));
}
