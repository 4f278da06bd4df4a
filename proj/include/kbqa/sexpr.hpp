#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kbqa {

// Logical-form AST for the KBQA query language. Queries are trees built
// from set-valued operators (JOIN, AND, comparisons, ARGMAX/ARGMIN) over
// entity sets, with COUNT as the only number-valued root.

enum class Datatype { Integer, Float, Datetime, Plain };
enum class CmpOp { Lt, Le, Gt, Ge };
enum class ArgOp { Max, Min };
enum class Orientation { Forward, Reverse };

std::string_view to_string(Datatype dt);
std::string_view to_string(CmpOp op);
std::string_view to_string(ArgOp op);

std::optional<Datatype> datatype_from_string(std::string_view s);

/// A relation occurrence. Direction is a property of the occurrence, not of
/// the grammar: an ungrounded mention is always forward, grounding may flip
/// it to reverse to traverse the relation tail-to-head.
struct RelRef {
  std::string name;
  Orientation orientation = Orientation::Forward;

  bool operator==(const RelRef&) const = default;
};

class SExpr;
using SExprPtr = std::shared_ptr<const SExpr>;

/// Entity leaf: either a KB identifier ("m.09c7w0") or a surface name
/// awaiting linking ("united States of America").
struct EntityRef {
  std::string name;
};

/// Typed literal; valid only as the value operand of a comparison.
struct LiteralVal {
  std::string text;
  Datatype datatype = Datatype::Plain;
};

struct Join {
  RelRef relation;
  SExprPtr sub;
};

struct And {
  SExprPtr lhs;
  SExprPtr rhs;
};

struct Cmp {
  CmpOp op;
  RelRef relation;
  SExprPtr value;  // literal, or a set-typed child rejected later at grounding
};

struct Arg {
  ArgOp op;
  SExprPtr sub;
  RelRef relation;
};

struct Count {
  SExprPtr sub;
};

class SExpr {
 public:
  using Node = std::variant<EntityRef, LiteralVal, Join, And, Cmp, Arg, Count>;

  explicit SExpr(Node node) : node_(std::move(node)) {}

  const Node& node() const { return node_; }

  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&node_);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node_);
  }

 private:
  Node node_;
};

SExprPtr make_entity(std::string name);
SExprPtr make_literal(std::string text, Datatype dt);
SExprPtr make_join(RelRef relation, SExprPtr sub);
SExprPtr make_and(SExprPtr lhs, SExprPtr rhs);
SExprPtr make_cmp(CmpOp op, RelRef relation, SExprPtr value);
SExprPtr make_arg(ArgOp op, SExprPtr sub, RelRef relation);
SExprPtr make_count(SExprPtr sub);

bool equal(const SExpr& a, const SExpr& b);
bool equal(const SExprPtr& a, const SExprPtr& b);

struct SyntaxError : std::runtime_error {
  explicit SyntaxError(const std::string& msg, std::size_t pos = 0)
      : std::runtime_error(msg), position(pos) {}
  std::size_t position;
};

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses the canonical text grammar (see docs/sexpr-grammar.md). Throws
/// SyntaxError for malformed token streams and TypeError when the tree is
/// syntactically fine but violates an operator domain.
SExprPtr parse_sexpr(std::string_view text);

/// Canonical single-space prefix form; parse_sexpr(print_sexpr(e)) == e.
std::string print_sexpr(const SExpr& expr);
std::string print_sexpr(const SExprPtr& expr);

struct TypeViolation {
  std::string path;        // slot path from the root, e.g. "/lhs/sub"
  std::string constraint;  // violated rule, human readable
};

/// Domain/range check. Empty result iff every operator receives operands of
/// the required kind and literals appear only as comparison values.
std::vector<TypeViolation> validate_types(const SExpr& expr);

struct MentionRef {
  std::string text;
  std::vector<int> path;  // child indexes from the root to the owning node
};

struct Mentions {
  std::vector<MentionRef> entities;
  std::vector<MentionRef> relations;
};

/// Entity and relation mentions in left-to-right depth-first (i.e. printed
/// text) order. Literals are not mentions.
Mentions collect_mentions(const SExpr& expr);

/// KB identifier heuristic: Freebase-style "m." / "g." prefixes.
bool looks_like_mid(std::string_view name);

/// Classifies an untyped value string into a literal: integers, dotted
/// decimals, ISO-style dates, plain text otherwise. Shared by the text
/// grammar's comparison-value position and the call-sequence interpreter so
/// the two routes agree on the same surface form.
SExprPtr classify_value_text(const std::string& text);

/// Rebuilds the tree with the i-th entity mention replaced by entities[i]
/// and the i-th relation mention replaced by relations[i], both in
/// collect_mentions order. Sizes must match the mention counts exactly.
SExprPtr substitute_mentions(const SExpr& expr,
                             const std::vector<std::string>& entities,
                             const std::vector<RelRef>& relations);

/// Rewrites EntityRef leaves through `mapper`; identity where the mapper
/// returns nullopt. Used to map KB identifiers to surface names for demos.
SExprPtr map_entity_names(
    const SExpr& expr,
    const std::function<std::optional<std::string>(const std::string&)>& mapper);

}  // namespace kbqa
