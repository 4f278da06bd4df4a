#pragma once

// Random well-typed expression generator for property tests. Generation
// happens in printed-text order and records the mentions as it goes, so the
// recorded lists double as an independent oracle for collect_mentions.

#include <random>
#include <string>
#include <vector>

#include "kbqa/sexpr.hpp"

namespace testsupport {

struct GeneratedExpr {
  kbqa::SExprPtr expr;
  std::vector<std::string> entity_mentions;    // textual DFS order
  std::vector<std::string> relation_mentions;  // textual DFS order
};

class ExprGenerator {
 public:
  struct Options {
    int max_depth = 6;
    bool allow_reverse = false;  // direction markers survive print/parse only
    bool quirky_names = false;   // names needing quoting in the text grammar
    bool set_valued_cmp = true;  // false keeps comparison values literal-only
  };

  ExprGenerator(std::uint64_t seed, Options options)
      : gen_(seed), options_(options) {}

  GeneratedExpr generate() {
    GeneratedExpr out;
    if (pick(8) == 0) {
      // number-typed root
      out.expr = kbqa::make_count(gen_set(1, out));
    } else {
      out.expr = gen_set(0, out);
    }
    return out;
  }

 private:
  std::uint64_t pick(std::uint64_t n) { return gen_() % n; }

  std::string safe_word() {
    static const char* words[] = {"alpha", "beta",  "gamma", "delta", "omega",
                                  "tokyo", "paris", "m.0x1", "g.11a", "rail"};
    return words[pick(std::size(words))];
  }

  std::string entity_name() {
    if (options_.quirky_names) {
      switch (pick(6)) {
        case 0: return "united States of America";
        case 1: return "it's \"quoted\"";
        case 2: return "back\\slash";
        case 3: return "^leading.caret";
        case 4: return "42";  // numeric-looking name must survive quoting
        default: break;
      }
    }
    std::string name = safe_word();
    if (pick(3) == 0) name += "." + std::to_string(pick(90));
    return name;
  }

  std::string relation_name() {
    if (options_.quirky_names && pick(5) == 0) return "has part";
    static const char* rels[] = {"people.person.nationality",
                                 "people.person.profession",
                                 "location.containedby",
                                 "height_meters",
                                 "population"};
    std::string name = rels[pick(std::size(rels))];
    if (pick(4) == 0) name += "." + std::to_string(pick(90));
    return name;
  }

  kbqa::RelRef relation(GeneratedExpr& out) {
    kbqa::RelRef rel{relation_name(), kbqa::Orientation::Forward};
    if (options_.allow_reverse && pick(3) == 0)
      rel.orientation = kbqa::Orientation::Reverse;
    out.relation_mentions.push_back(rel.name);
    return rel;
  }

  kbqa::SExprPtr entity(GeneratedExpr& out) {
    std::string name = entity_name();
    out.entity_mentions.push_back(name);
    return kbqa::make_entity(name);
  }

  kbqa::SExprPtr literal() {
    switch (pick(4)) {
      case 0:
        return kbqa::make_literal(std::to_string(pick(5000)),
                                  kbqa::Datatype::Integer);
      case 1:
        return kbqa::make_literal(
            std::to_string(pick(100)) + "." + std::to_string(pick(10)) +
                std::to_string(pick(10)),
            kbqa::Datatype::Float);
      case 2: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d",
                      int(1900 + pick(120)), int(1 + pick(12)), int(1 + pick(28)));
        return kbqa::make_literal(buf, kbqa::Datatype::Datetime);
      }
      default:
        // plain text must not look numeric or date-like, or the untyped
        // call-sequence route reclassifies it
        return kbqa::make_literal(
            safe_word() + (options_.quirky_names ? " value" : "_value"),
            kbqa::Datatype::Plain);
    }
  }

  kbqa::SExprPtr gen_set(int depth, GeneratedExpr& out) {
    if (depth >= options_.max_depth || pick(3) == 0) return entity(out);
    switch (pick(5)) {
      case 0:
        return entity(out);
      case 1: {
        kbqa::RelRef rel = relation(out);
        return kbqa::make_join(std::move(rel), gen_set(depth + 1, out));
      }
      case 2: {
        auto lhs = gen_set(depth + 1, out);
        return kbqa::make_and(std::move(lhs), gen_set(depth + 1, out));
      }
      case 3: {
        auto op = static_cast<kbqa::CmpOp>(pick(4));
        kbqa::RelRef rel = relation(out);
        kbqa::SExprPtr value = options_.set_valued_cmp && pick(4) == 0
                                   ? gen_set(depth + 1, out)
                                   : literal();
        return kbqa::make_cmp(op, std::move(rel), std::move(value));
      }
      default: {
        auto op = pick(2) ? kbqa::ArgOp::Max : kbqa::ArgOp::Min;
        auto sub = gen_set(depth + 1, out);
        return kbqa::make_arg(op, std::move(sub), relation(out));
      }
    }
  }

  std::mt19937_64 gen_;
  Options options_;
};

}  // namespace testsupport
