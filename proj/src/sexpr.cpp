#include "kbqa/sexpr.hpp"

#include <cctype>
#include <sstream>

namespace kbqa {

namespace {

constexpr int kMaxDepth = 256;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

bool is_integer_text(std::string_view s) {
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  if (i >= s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

bool is_float_text(std::string_view s) {
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  bool digits = false, dot = false, exp = false, exp_digits = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      (exp ? exp_digits : digits) = true;
    } else if (c == '.' && !dot && !exp) {
      dot = true;
    } else if ((c == 'e' || c == 'E') && digits && !exp) {
      exp = true;
      if (i + 1 < s.size() && (s[i + 1] == '+' || s[i + 1] == '-')) ++i;
    } else {
      return false;
    }
  }
  return digits && (dot || exp) && (!exp || exp_digits);
}

}  // namespace

std::string_view to_string(Datatype dt) {
  switch (dt) {
    case Datatype::Integer: return "integer";
    case Datatype::Float: return "float";
    case Datatype::Datetime: return "datetime";
    case Datatype::Plain: return "plain";
  }
  return "plain";
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "<";
}

std::string_view to_string(ArgOp op) {
  return op == ArgOp::Max ? "ARGMAX" : "ARGMIN";
}

std::optional<Datatype> datatype_from_string(std::string_view s) {
  if (s == "integer") return Datatype::Integer;
  if (s == "float") return Datatype::Float;
  if (s == "datetime") return Datatype::Datetime;
  if (s == "plain") return Datatype::Plain;
  return std::nullopt;
}

SExprPtr make_entity(std::string name) {
  return std::make_shared<SExpr>(EntityRef{std::move(name)});
}
SExprPtr make_literal(std::string text, Datatype dt) {
  return std::make_shared<SExpr>(LiteralVal{std::move(text), dt});
}
SExprPtr make_join(RelRef relation, SExprPtr sub) {
  return std::make_shared<SExpr>(Join{std::move(relation), std::move(sub)});
}
SExprPtr make_and(SExprPtr lhs, SExprPtr rhs) {
  return std::make_shared<SExpr>(And{std::move(lhs), std::move(rhs)});
}
SExprPtr make_cmp(CmpOp op, RelRef relation, SExprPtr value) {
  return std::make_shared<SExpr>(Cmp{op, std::move(relation), std::move(value)});
}
SExprPtr make_arg(ArgOp op, SExprPtr sub, RelRef relation) {
  return std::make_shared<SExpr>(Arg{op, std::move(sub), std::move(relation)});
}
SExprPtr make_count(SExprPtr sub) {
  return std::make_shared<SExpr>(Count{std::move(sub)});
}

bool equal(const SExpr& a, const SExpr& b) {
  if (a.node().index() != b.node().index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using T = std::decay_t<decltype(na)>;
        const T& nb = std::get<T>(b.node());
        if constexpr (std::is_same_v<T, EntityRef>) {
          return na.name == nb.name;
        } else if constexpr (std::is_same_v<T, LiteralVal>) {
          return na.text == nb.text && na.datatype == nb.datatype;
        } else if constexpr (std::is_same_v<T, Join>) {
          return na.relation == nb.relation && equal(na.sub, nb.sub);
        } else if constexpr (std::is_same_v<T, And>) {
          return equal(na.lhs, nb.lhs) && equal(na.rhs, nb.rhs);
        } else if constexpr (std::is_same_v<T, Cmp>) {
          return na.op == nb.op && na.relation == nb.relation &&
                 equal(na.value, nb.value);
        } else if constexpr (std::is_same_v<T, Arg>) {
          return na.op == nb.op && na.relation == nb.relation &&
                 equal(na.sub, nb.sub);
        } else {
          return equal(na.sub, std::get<Count>(b.node()).sub);
        }
      },
      a.node());
}

bool equal(const SExprPtr& a, const SExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return equal(*a, *b);
}

bool looks_like_mid(std::string_view name) {
  return name.size() > 2 && (name.substr(0, 2) == "m." || name.substr(0, 2) == "g.");
}

SExprPtr classify_value_text(const std::string& text) {
  if (is_integer_text(text)) return make_literal(text, Datatype::Integer);
  if (is_float_text(text)) return make_literal(text, Datatype::Float);
  bool datelike = text.size() >= 10 &&
                  std::isdigit(static_cast<unsigned char>(text[0])) &&
                  std::isdigit(static_cast<unsigned char>(text[1])) &&
                  std::isdigit(static_cast<unsigned char>(text[2])) &&
                  std::isdigit(static_cast<unsigned char>(text[3])) &&
                  text[4] == '-' && text[7] == '-';
  if (datelike) return make_literal(text, Datatype::Datetime);
  return make_literal(text, Datatype::Plain);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

bool atom_needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  if (s.front() == '^') return true;  // reserved for relation direction
  if (is_integer_text(s) || is_float_text(s)) return true;
  if (s.find("^^") != std::string_view::npos) return true;
  for (char c : s)
    if (is_space(c) || c == '(' || c == ')' || c == '"' || c == '\'' || c == '\\')
      return true;
  return false;
}

// Literal text is always followed by ^^datatype, so digits stay bare.
bool literal_text_needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  for (char c : s)
    if (is_space(c) || c == '(' || c == ')' || c == '"' || c == '\'' ||
        c == '\\' || c == '^')
      return true;
  return false;
}

void append_quoted(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
}

void append_atom(std::string& out, std::string_view s) {
  if (atom_needs_quotes(s))
    append_quoted(out, s);
  else
    out += s;
}

void append_relation(std::string& out, const RelRef& rel) {
  if (rel.orientation == Orientation::Reverse) out += '^';
  append_atom(out, rel.name);
}

void append_literal(std::string& out, const LiteralVal& lit) {
  if (literal_text_needs_quotes(lit.text))
    append_quoted(out, lit.text);
  else
    out += lit.text;
  out += "^^";
  out += to_string(lit.datatype);
}

void print_rec(std::string& out, const SExpr& e) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, EntityRef>) {
          append_atom(out, n.name);
        } else if constexpr (std::is_same_v<T, LiteralVal>) {
          append_literal(out, n);
        } else if constexpr (std::is_same_v<T, Join>) {
          out += "(JOIN ";
          append_relation(out, n.relation);
          out += ' ';
          print_rec(out, *n.sub);
          out += ')';
        } else if constexpr (std::is_same_v<T, And>) {
          out += "(AND ";
          print_rec(out, *n.lhs);
          out += ' ';
          print_rec(out, *n.rhs);
          out += ')';
        } else if constexpr (std::is_same_v<T, Cmp>) {
          out += '(';
          out += to_string(n.op);
          out += ' ';
          append_relation(out, n.relation);
          out += ' ';
          // Bare words in value position read back as literals, so entity
          // names here are always quoted.
          if (const auto* entity = n.value->template get_if<EntityRef>())
            append_quoted(out, entity->name);
          else
            print_rec(out, *n.value);
          out += ')';
        } else if constexpr (std::is_same_v<T, Arg>) {
          out += '(';
          out += to_string(n.op);
          out += ' ';
          print_rec(out, *n.sub);
          out += ' ';
          append_relation(out, n.relation);
          out += ')';
        } else {
          out += "(COUNT ";
          print_rec(out, *n.sub);
          out += ')';
        }
      },
      e.node());
}

}  // namespace

std::string print_sexpr(const SExpr& expr) {
  std::string out;
  print_rec(out, expr);
  return out;
}

std::string print_sexpr(const SExprPtr& expr) { return print_sexpr(*expr); }

// ---------------------------------------------------------------------------
// Lexing + parsing

namespace {

struct Token {
  enum class Kind { LParen, RParen, Atom, Quoted, Literal, End } kind;
  std::string text;       // atom text / quoted payload / literal payload
  Datatype datatype{};    // for Kind::Literal
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space();
    std::size_t start = pos_;
    if (pos_ >= text_.size()) return {Token::Kind::End, "", {}, start};
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      return {Token::Kind::LParen, "(", {}, start};
    }
    if (c == ')') {
      ++pos_;
      return {Token::Kind::RParen, ")", {}, start};
    }
    if (c == '"') return quoted_or_literal(start);
    return bare(start);
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string read_quoted() {
    ++pos_;  // opening quote
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\' && pos_ < text_.size()) c = text_[pos_++];
      out += c;
    }
    if (pos_ >= text_.size()) throw SyntaxError("unterminated string", pos_);
    ++pos_;  // closing quote
    return out;
  }

  Token quoted_or_literal(std::size_t start) {
    std::string payload = read_quoted();
    if (pos_ + 1 < text_.size() && text_[pos_] == '^' && text_[pos_ + 1] == '^') {
      pos_ += 2;
      return typed_literal(std::move(payload), start);
    }
    return {Token::Kind::Quoted, std::move(payload), {}, start};
  }

  Token typed_literal(std::string payload, std::size_t start) {
    std::size_t tag_start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')')
      ++pos_;
    auto dt = datatype_from_string(text_.substr(tag_start, pos_ - tag_start));
    if (!dt) throw SyntaxError("unknown literal datatype tag", tag_start);
    return {Token::Kind::Literal, std::move(payload), *dt, start};
  }

  Token bare(std::size_t start) {
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')' && text_[pos_] != '"')
      ++pos_;
    std::string_view word = text_.substr(start, pos_ - start);
    // A bare token may carry a datatype tag: 2.0^^float
    if (auto cut = word.rfind("^^"); cut != std::string_view::npos) {
      auto dt = datatype_from_string(word.substr(cut + 2));
      if (!dt) throw SyntaxError("unknown literal datatype tag", start + cut + 2);
      return {Token::Kind::Literal, std::string(word.substr(0, cut)), *dt, start};
    }
    return {Token::Kind::Atom, std::string(word), {}, start};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { advance(); }

  SExprPtr parse() {
    SExprPtr e = parse_set_or_value(0, /*allow_literal=*/false);
    if (cur_.kind != Token::Kind::End)
      throw SyntaxError("trailing input after expression", cur_.pos);
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError(msg, cur_.pos);
  }

  RelRef parse_relation(std::string_view head) {
    if (cur_.kind == Token::Kind::LParen)
      throw TypeError(std::string(head) + " relation position requires a relation name");
    if (cur_.kind == Token::Kind::Literal)
      throw TypeError(std::string(head) + " relation position requires a relation name, got literal");
    if (cur_.kind == Token::Kind::RParen || cur_.kind == Token::Kind::End)
      fail("missing relation argument");
    RelRef rel;
    if (cur_.kind == Token::Kind::Atom && !cur_.text.empty() && cur_.text[0] == '^') {
      rel.orientation = Orientation::Reverse;
      if (cur_.text.size() > 1) {
        rel.name = cur_.text.substr(1);
        advance();
      } else {
        advance();  // bare "^" followed by a quoted name
        if (cur_.kind != Token::Kind::Quoted) fail("dangling relation direction marker");
        rel.name = cur_.text;
        advance();
      }
    } else {
      rel.name = cur_.text;
      advance();
    }
    if (rel.name.empty()) throw TypeError("relation name must be non-empty");
    return rel;
  }

  SExprPtr parse_set_or_value(int depth, bool allow_literal) {
    if (depth > kMaxDepth) fail("expression nested too deeply");
    switch (cur_.kind) {
      case Token::Kind::LParen:
        return parse_compound(depth);
      case Token::Kind::Quoted: {
        auto e = make_entity(cur_.text);
        advance();
        return e;
      }
      case Token::Kind::Literal: {
        if (!allow_literal)
          throw TypeError("literal value allowed only as comparison value");
        auto e = make_literal(cur_.text, cur_.datatype);
        advance();
        return e;
      }
      case Token::Kind::Atom: {
        const std::string& word = cur_.text;
        if (!word.empty() && word[0] == '^')
          fail("relation direction marker outside relation position");
        if (allow_literal) {
          // Comparison-value position: untyped bare words classify exactly
          // as the call-sequence interpreter classifies string arguments.
          auto e = classify_value_text(word);
          advance();
          return e;
        }
        if (is_integer_text(word) || is_float_text(word))
          throw TypeError("literal value allowed only as comparison value");
        auto e = make_entity(word);
        advance();
        return e;
      }
      default:
        fail("expected expression");
    }
  }

  // Children of set-typed operators must themselves be set-typed.
  SExprPtr parse_set_operand(int depth, std::string_view head) {
    SExprPtr e = parse_set_or_value(depth, /*allow_literal=*/false);
    if (e->is<Count>())
      throw TypeError(std::string(head) +
                      " operand must be set-typed, COUNT yields a number");
    return e;
  }

  void expect_rparen(std::string_view head) {
    if (cur_.kind == Token::Kind::RParen) {
      advance();
      return;
    }
    if (cur_.kind == Token::Kind::End) fail("unbalanced parentheses");
    throw SyntaxError(std::string(head) + ": too many arguments", cur_.pos);
  }

  void require_more_args(std::string_view head) {
    if (cur_.kind == Token::Kind::RParen || cur_.kind == Token::Kind::End)
      throw SyntaxError(std::string(head) + ": missing argument", cur_.pos);
  }

  SExprPtr parse_compound(int depth) {
    advance();  // consume '('
    if (cur_.kind != Token::Kind::Atom)
      fail("expected operator name after '('");
    std::string head = cur_.text;
    advance();

    if (head == "JOIN") {
      RelRef rel = parse_relation(head);
      require_more_args(head);
      SExprPtr sub = parse_set_operand(depth + 1, head);
      expect_rparen(head);
      return make_join(std::move(rel), std::move(sub));
    }
    if (head == "AND") {
      require_more_args(head);
      SExprPtr lhs = parse_set_operand(depth + 1, head);
      require_more_args(head);
      SExprPtr rhs = parse_set_operand(depth + 1, head);
      expect_rparen(head);
      return make_and(std::move(lhs), std::move(rhs));
    }
    if (head == "COUNT") {
      require_more_args(head);
      SExprPtr sub = parse_set_operand(depth + 1, head);
      expect_rparen(head);
      return make_count(std::move(sub));
    }
    if (head == "ARGMAX" || head == "ARGMIN") {
      require_more_args(head);
      SExprPtr sub = parse_set_operand(depth + 1, head);
      require_more_args(head);
      RelRef rel = parse_relation(head);
      expect_rparen(head);
      return make_arg(head == "ARGMAX" ? ArgOp::Max : ArgOp::Min,
                      std::move(sub), std::move(rel));
    }
    if (head == "<" || head == "<=" || head == ">" || head == ">=") {
      CmpOp op = head == "<"    ? CmpOp::Lt
                 : head == "<=" ? CmpOp::Le
                 : head == ">"  ? CmpOp::Gt
                                : CmpOp::Ge;
      RelRef rel = parse_relation(head);
      require_more_args(head);
      SExprPtr value = parse_set_or_value(depth + 1, /*allow_literal=*/true);
      if (value->is<Count>())
        throw TypeError("comparison value must be a literal or set-typed");
      expect_rparen(head);
      return make_cmp(op, std::move(rel), std::move(value));
    }
    fail("unknown operator '" + head + "'");
  }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

SExprPtr parse_sexpr(std::string_view text) {
  Parser parser(text);
  SExprPtr e = parser.parse();
  auto violations = validate_types(*e);
  if (!violations.empty())
    throw TypeError(violations.front().constraint + " (at " +
                    violations.front().path + ")");
  return e;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool is_set_typed(const SExpr& e) {
  return e.is<EntityRef>() || e.is<Join>() || e.is<And>() || e.is<Cmp>() ||
         e.is<Arg>();
}

std::string render_path(const std::string& path) {
  return path.empty() ? "/" : path;
}

void check_relation(const RelRef& rel, const std::string& path,
                    std::vector<TypeViolation>& out) {
  if (rel.name.empty())
    out.push_back({render_path(path), "relation name must be non-empty"});
}

void check_set_child(const SExpr& child, std::string_view owner,
                     const std::string& path, std::vector<TypeViolation>& out) {
  if (child.is<Count>()) {
    out.push_back({render_path(path),
                   std::string(owner) +
                       " operand must be set-typed, COUNT yields a number"});
  } else if (child.is<LiteralVal>()) {
    out.push_back({render_path(path), "literal value allowed only as comparison value"});
  }
}

void validate_rec(const SExpr& e, const std::string& path,
                  std::vector<TypeViolation>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Join>) {
          check_relation(n.relation, path, out);
          check_set_child(*n.sub, "JOIN", path + "/sub", out);
          validate_rec(*n.sub, path + "/sub", out);
        } else if constexpr (std::is_same_v<T, And>) {
          check_set_child(*n.lhs, "AND", path + "/lhs", out);
          check_set_child(*n.rhs, "AND", path + "/rhs", out);
          validate_rec(*n.lhs, path + "/lhs", out);
          validate_rec(*n.rhs, path + "/rhs", out);
        } else if constexpr (std::is_same_v<T, Cmp>) {
          check_relation(n.relation, path, out);
          if (!n.value->template is<LiteralVal>() && !is_set_typed(*n.value))
            out.push_back({render_path(path + "/value"),
                           "comparison value must be a literal or set-typed"});
          validate_rec(*n.value, path + "/value", out);
        } else if constexpr (std::is_same_v<T, Arg>) {
          check_relation(n.relation, path, out);
          check_set_child(*n.sub, to_string(n.op), path + "/sub", out);
          validate_rec(*n.sub, path + "/sub", out);
        } else if constexpr (std::is_same_v<T, Count>) {
          check_set_child(*n.sub, "COUNT", path + "/sub", out);
          validate_rec(*n.sub, path + "/sub", out);
        } else if constexpr (std::is_same_v<T, EntityRef>) {
          if (n.name.empty())
            out.push_back({render_path(path), "entity name must be non-empty"});
        }
      },
      e.node());
}

}  // namespace

std::vector<TypeViolation> validate_types(const SExpr& expr) {
  std::vector<TypeViolation> out;
  if (expr.is<LiteralVal>()) {
    out.push_back({"/", "query root must be set- or number-typed"});
    return out;
  }
  validate_rec(expr, "", out);
  return out;
}

// ---------------------------------------------------------------------------
// Mentions and substitution

namespace {

void collect_rec(const SExpr& e, std::vector<int>& path, Mentions& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, EntityRef>) {
          out.entities.push_back({n.name, path});
        } else if constexpr (std::is_same_v<T, Join>) {
          out.relations.push_back({n.relation.name, path});
          path.push_back(0);
          collect_rec(*n.sub, path, out);
          path.pop_back();
        } else if constexpr (std::is_same_v<T, And>) {
          path.push_back(0);
          collect_rec(*n.lhs, path, out);
          path.back() = 1;
          collect_rec(*n.rhs, path, out);
          path.pop_back();
        } else if constexpr (std::is_same_v<T, Cmp>) {
          out.relations.push_back({n.relation.name, path});
          path.push_back(0);
          collect_rec(*n.value, path, out);
          path.pop_back();
        } else if constexpr (std::is_same_v<T, Arg>) {
          // Printed order: (ARGMAX sub relation)
          path.push_back(0);
          collect_rec(*n.sub, path, out);
          path.pop_back();
          out.relations.push_back({n.relation.name, path});
        } else if constexpr (std::is_same_v<T, Count>) {
          path.push_back(0);
          collect_rec(*n.sub, path, out);
          path.pop_back();
        }
      },
      e.node());
}

struct SubstCursor {
  const std::vector<std::string>* entities;
  const std::vector<RelRef>* relations;
  std::size_t next_entity = 0;
  std::size_t next_relation = 0;
};

SExprPtr subst_rec(const SExpr& e, SubstCursor& cur) {
  return std::visit(
      [&](const auto& n) -> SExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, EntityRef>) {
          return make_entity((*cur.entities).at(cur.next_entity++));
        } else if constexpr (std::is_same_v<T, LiteralVal>) {
          return make_literal(n.text, n.datatype);
        } else if constexpr (std::is_same_v<T, Join>) {
          RelRef rel = (*cur.relations).at(cur.next_relation++);
          return make_join(std::move(rel), subst_rec(*n.sub, cur));
        } else if constexpr (std::is_same_v<T, And>) {
          auto lhs = subst_rec(*n.lhs, cur);
          return make_and(std::move(lhs), subst_rec(*n.rhs, cur));
        } else if constexpr (std::is_same_v<T, Cmp>) {
          RelRef rel = (*cur.relations).at(cur.next_relation++);
          return make_cmp(n.op, std::move(rel), subst_rec(*n.value, cur));
        } else if constexpr (std::is_same_v<T, Arg>) {
          auto sub = subst_rec(*n.sub, cur);
          RelRef rel = (*cur.relations).at(cur.next_relation++);
          return make_arg(n.op, std::move(sub), std::move(rel));
        } else {
          return make_count(subst_rec(*n.sub, cur));
        }
      },
      e.node());
}

}  // namespace

Mentions collect_mentions(const SExpr& expr) {
  Mentions out;
  std::vector<int> path;
  collect_rec(expr, path, out);
  return out;
}

SExprPtr substitute_mentions(const SExpr& expr,
                             const std::vector<std::string>& entities,
                             const std::vector<RelRef>& relations) {
  Mentions mentions = collect_mentions(expr);
  if (mentions.entities.size() != entities.size() ||
      mentions.relations.size() != relations.size())
    throw std::invalid_argument("substitution list sizes do not match mention counts");
  SubstCursor cur{&entities, &relations};
  return subst_rec(expr, cur);
}

SExprPtr map_entity_names(
    const SExpr& expr,
    const std::function<std::optional<std::string>(const std::string&)>& mapper) {
  return std::visit(
      [&](const auto& n) -> SExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, EntityRef>) {
          if (auto mapped = mapper(n.name)) return make_entity(*mapped);
          return make_entity(n.name);
        } else if constexpr (std::is_same_v<T, LiteralVal>) {
          return make_literal(n.text, n.datatype);
        } else if constexpr (std::is_same_v<T, Join>) {
          return make_join(n.relation, map_entity_names(*n.sub, mapper));
        } else if constexpr (std::is_same_v<T, And>) {
          return make_and(map_entity_names(*n.lhs, mapper),
                          map_entity_names(*n.rhs, mapper));
        } else if constexpr (std::is_same_v<T, Cmp>) {
          return make_cmp(n.op, n.relation, map_entity_names(*n.value, mapper));
        } else if constexpr (std::is_same_v<T, Arg>) {
          return make_arg(n.op, map_entity_names(*n.sub, mapper), n.relation);
        } else {
          return make_count(map_entity_names(*n.sub, mapper));
        }
      },
      expr.node());
}

}  // namespace kbqa
