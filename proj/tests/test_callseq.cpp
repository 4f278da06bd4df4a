#include <doctest.h>

#include <map>

#include "generators.hpp"
#include "kbqa/callseq.hpp"

using namespace kbqa;

namespace {

const char* kPresentersDemo =
    "question = 'how many american presenters in total'\n"
    "expression = START('presenter')\n"
    "expression = JOIN('profession', expression)\n"
    "expression1 = START('united States of America')\n"
    "expression1 = JOIN('nationality', expression1)\n"
    "expression = AND(expression, expression1)\n"
    "expression = COUNT(expression)\n"
    "expression = STOP(expression)\n";

// Independent oracle: the statements replayed over plain strings with the
// same formatting the instruction block's Python functions use.
std::string string_machine(const CallSequence& seq) {
  std::map<std::string, std::string> env;
  std::string result;
  auto arg = [&](const CallArg& a) {
    return a.kind == CallArg::Kind::StringLit ? a.value : env.at(a.value);
  };
  for (const CallStatement& s : seq.statements) {
    std::string value;
    switch (s.func) {
      case MetaFn::Start: value = arg(s.args[0]); break;
      case MetaFn::Join:
        value = "(JOIN " + arg(s.args[0]) + " " + arg(s.args[1]) + ")";
        break;
      case MetaFn::And:
        value = "(AND " + arg(s.args[0]) + " " + arg(s.args[1]) + ")";
        break;
      case MetaFn::Arg:
        value = "(" + arg(s.args[0]) + " " + arg(s.args[1]) + " " +
                arg(s.args[2]) + ")";
        break;
      case MetaFn::Cmp:
        value = "(" + arg(s.args[0]) + " " + arg(s.args[1]) + " " +
                arg(s.args[2]) + ")";
        break;
      case MetaFn::Count: value = "(COUNT " + arg(s.args[0]) + ")"; break;
      case MetaFn::Stop: result = arg(s.args[0]); continue;
    }
    env[s.target_var] = value;
  }
  return result;
}

FormatErrorReason reason_of(const std::string& text) {
  try {
    interpret(parse_callseq(text));
  } catch (const FormatError& e) {
    return e.reason;
  }
  FAIL("expected a format error");
  return FormatErrorReason::NoStatements;
}

}  // namespace

TEST_CASE("the worked demo block parses into question plus 7 statements") {
  CallSequence seq = parse_callseq(kPresentersDemo);
  REQUIRE(seq.question.has_value());
  CHECK(*seq.question == "how many american presenters in total");
  REQUIRE(seq.statements.size() == 7);
  CHECK(seq.statements.back().func == MetaFn::Stop);
}

TEST_CASE("minimal valid program") {
  CallSequence seq =
      parse_callseq("expression = START('x')\nexpression = STOP(expression)");
  CHECK_FALSE(seq.question.has_value());
  REQUIRE(seq.statements.size() == 2);
  SExprPtr e = interpret(seq);
  CHECK(print_sexpr(e) == "x");
}

TEST_CASE("format error reasons") {
  CHECK(reason_of("expression = JOIN('r')") == FormatErrorReason::BadArity);
  CHECK(reason_of("") == FormatErrorReason::NoStatements);
  CHECK(reason_of("the answer is 42, obviously") ==
        FormatErrorReason::NoStatements);
  CHECK(reason_of("expression = START('x')") == FormatErrorReason::MissingStop);
  CHECK(reason_of("expression = FROB('x')\nexpression = STOP(expression)") ==
        FormatErrorReason::UnknownFunction);
  CHECK(reason_of("expression = JOIN('r', other)\nexpression = STOP(expression)") ==
        FormatErrorReason::UseBeforeDef);
  CHECK(reason_of("expression = ARG('MAX', e, 'r')") ==
        FormatErrorReason::BadEnumArg);
  CHECK(reason_of("expression = CMP('==', 'r', '5')") ==
        FormatErrorReason::BadEnumArg);
  // COUNT nested under JOIN builds, then fails the type check
  CHECK(reason_of("expression = START('x')\n"
                  "expression = COUNT(expression)\n"
                  "expression = JOIN('r', expression)\n"
                  "expression = STOP(expression)") ==
        FormatErrorReason::TypeViolation);
}

TEST_CASE("prose and markdown around the program are skipped") {
  CallSequence seq = parse_callseq(
      "Sure! Here is the function call sequence you asked for:\n"
      "```python\n"
      "expression = START('tokyo')\n"
      "expression = JOIN('location.containedby', expression)\n"
      "expression = STOP(expression)\n"
      "```\n"
      "Let me know if you need anything else.");
  REQUIRE(seq.statements.size() == 3);
  CHECK(print_sexpr(interpret(seq)) == "(JOIN location.containedby tokyo)");
}

TEST_CASE("extraction stops at the first STOP") {
  CallSequence seq = parse_callseq(
      "expression = START('a')\n"
      "expression = STOP(expression)\n"
      "question = 'hallucinated follow-up'\n"
      "expression = START('b')\n"
      "expression = STOP(expression)\n");
  REQUIRE(seq.statements.size() == 2);
  CHECK(print_sexpr(interpret(seq)) == "a");
}

TEST_CASE("the published demo's reassigned-variable quirk still interprets") {
  // The worked example assigns the second JOIN from `expression` rather than
  // `expression1`; both spellings must parse and interpret.
  CallSequence quirk = parse_callseq(
      "expression = START('presenter')\n"
      "expression = JOIN('profession', expression)\n"
      "expression1 = START('united States of America')\n"
      "expression1 = JOIN('nationality', expression)\n"
      "expression = AND(expression, expression1)\n"
      "expression = COUNT(expression)\n"
      "expression = STOP(expression)\n");
  SExprPtr e = interpret(quirk);
  CHECK(e->is<Count>());
}

TEST_CASE("interpreting the demo matches the published logical form") {
  SExprPtr e = interpret(parse_callseq(kPresentersDemo));
  CHECK(print_sexpr(e) ==
        "(COUNT (AND (JOIN profession presenter) "
        "(JOIN nationality \"united States of America\")))");
}

TEST_CASE("string literals accept both quote styles and escapes") {
  CallSequence seq = parse_callseq(
      "expression = START(\"it's \\\"x\\\"\")\nexpression = STOP(expression)");
  CHECK(interpret(seq)->get_if<EntityRef>()->name == "it's \"x\"");
}

TEST_CASE("inline string arguments in set positions become entities") {
  // Style used by published worked cases: a class name passed directly.
  CallSequence seq = parse_callseq(
      "expression = START('road runner railway')\n"
      "expression = JOIN('amusement_parks.roller_coaster_material.roller_coasters', expression)\n"
      "expression = AND('amusement_parks.roller_coaster_material', expression)\n"
      "expression = STOP(expression)\n");
  SExprPtr e = interpret(seq);
  const auto* a = e->get_if<And>();
  REQUIRE(a);
  CHECK(a->lhs->get_if<EntityRef>()->name == "amusement_parks.roller_coaster_material");
}

TEST_CASE("compile emits the figure-style bottom-up sequence") {
  SExprPtr e = parse_sexpr(
      "(COUNT (AND (JOIN nationality \"united States of America\") "
      "(JOIN profession presenter)))");
  CallSequence seq =
      compile_to_callseq(*e, "how many american presenters in total");
  CHECK(render_callseq(seq) ==
        "question = 'how many american presenters in total'\n"
        "expression = START('united States of America')\n"
        "expression = JOIN('nationality', expression)\n"
        "expression1 = START('presenter')\n"
        "expression1 = JOIN('profession', expression1)\n"
        "expression = AND(expression, expression1)\n"
        "expression = COUNT(expression)\n"
        "expression = STOP(expression)\n");
}

TEST_CASE("compile of an atom is START plus STOP") {
  CallSequence seq = compile_to_callseq(*make_entity("x"), std::nullopt);
  REQUIRE(seq.statements.size() == 2);
  CHECK(seq.statements[0].func == MetaFn::Start);
  CHECK(seq.statements[1].func == MetaFn::Stop);
}

TEST_CASE("statement count is non-leaf nodes plus entity leaves plus STOP") {
  testsupport::ExprGenerator gen(11, {.max_depth = 6});
  for (int i = 0; i < 300; ++i) {
    testsupport::GeneratedExpr g = gen.generate();
    CallSequence seq = compile_to_callseq(*g.expr, std::nullopt);
    std::size_t starts = 0;
    for (const CallStatement& s : seq.statements)
      if (s.func == MetaFn::Start) ++starts;
    CHECK(starts == g.entity_mentions.size());
    CHECK(seq.statements.back().func == MetaFn::Stop);
  }
}

TEST_CASE("interpret(compile(e)) is the identity on well-typed trees") {
  testsupport::ExprGenerator gen(13, {.max_depth = 6, .quirky_names = true});
  for (int i = 0; i < 1000; ++i) {
    testsupport::GeneratedExpr g = gen.generate();
    CallSequence seq = compile_to_callseq(*g.expr, "q");
    CAPTURE(render_callseq(seq));
    SExprPtr back = interpret(seq);
    CHECK(equal(back, g.expr));
  }
}

TEST_CASE("interpret agrees with the string-machine oracle") {
  // Space-free names and literal-only comparisons: the string machine
  // concatenates raw names into the printed form, which cannot carry spaces
  // or entity-vs-literal distinctions unambiguously.
  testsupport::ExprGenerator gen(17, {.max_depth = 6, .set_valued_cmp = false});
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    testsupport::GeneratedExpr g = gen.generate();
    CallSequence seq = compile_to_callseq(*g.expr, std::nullopt);
    std::string oracle_text = string_machine(seq);
    SExprPtr via_oracle = parse_sexpr(oracle_text);
    SExprPtr via_interpreter = interpret(seq);
    CHECK(equal(via_oracle, via_interpreter));
    ++compared;
  }
  CHECK(compared == 1000);
}

TEST_CASE("round-trip through rendered text") {
  testsupport::ExprGenerator gen(23, {.max_depth = 5, .quirky_names = true});
  for (int i = 0; i < 300; ++i) {
    testsupport::GeneratedExpr g = gen.generate();
    CallSequence seq = compile_to_callseq(*g.expr, "does it round trip?");
    CallSequence reparsed = parse_callseq(render_callseq(seq));
    CHECK(reparsed == seq);
  }
}

TEST_CASE("check_format is a total verdict function") {
  CHECK(check_format(kPresentersDemo).ok);
  FormatVerdict empty = check_format("");
  CHECK_FALSE(empty.ok);
  CHECK(*empty.reason == FormatErrorReason::NoStatements);
  FormatVerdict bad_type = check_format(
      "expression = START('x')\n"
      "expression = COUNT(expression)\n"
      "expression = JOIN('r', expression)\n"
      "expression = STOP(expression)");
  CHECK_FALSE(bad_type.ok);
  CHECK(*bad_type.reason == FormatErrorReason::TypeViolation);
}
