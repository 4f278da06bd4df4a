#include "kbqa/callseq.hpp"

#include <cctype>
#include <map>
#include <set>

namespace kbqa {

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::optional<MetaFn> metafn_from_name(std::string_view name) {
  if (name == "START") return MetaFn::Start;
  if (name == "JOIN") return MetaFn::Join;
  if (name == "AND") return MetaFn::And;
  if (name == "ARG") return MetaFn::Arg;
  if (name == "CMP") return MetaFn::Cmp;
  if (name == "COUNT") return MetaFn::Count;
  if (name == "STOP") return MetaFn::Stop;
  return std::nullopt;
}

std::size_t arity_of(MetaFn fn) {
  switch (fn) {
    case MetaFn::Start:
    case MetaFn::Count:
    case MetaFn::Stop:
      return 1;
    case MetaFn::Join:
    case MetaFn::And:
      return 2;
    case MetaFn::Arg:
    case MetaFn::Cmp:
      return 3;
  }
  return 0;
}

// Line scanner over one candidate statement. Returns nullopt when the line
// is not statement-shaped at all (and should be skipped as prose).
class LineScanner {
 public:
  explicit LineScanner(std::string_view line) : s_(line) {}

  std::optional<std::string> ident() {
    skip_ws();
    if (pos_ >= s_.size() || !is_ident_start(s_[pos_])) return std::nullopt;
    std::size_t start = pos_;
    while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  std::optional<std::string> quoted() {
    skip_ws();
    if (pos_ >= s_.size() || (s_[pos_] != '\'' && s_[pos_] != '"'))
      return std::nullopt;
    char q = s_[pos_++];
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != q) {
      char c = s_[pos_++];
      if (c == '\\' && pos_ < s_.size()) {
        char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '\\': out += '\\'; break;
          case '\'': out += '\''; break;
          case '"': out += '"'; break;
          default:
            out += '\\';
            out += e;
        }
      } else {
        out += c;
      }
    }
    if (pos_ >= s_.size()) return std::nullopt;  // unterminated
    ++pos_;
    return out;
  }

  std::optional<std::string> number() {
    skip_ws();
    std::size_t start = pos_;
    std::size_t p = pos_;
    if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
    bool digits = false, dot = false;
    while (p < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[p])) ||
            (s_[p] == '.' && !dot))) {
      if (s_[p] == '.')
        dot = true;
      else
        digits = true;
      ++p;
    }
    if (!digits) return std::nullopt;
    pos_ = p;
    return std::string(s_.substr(start, pos_ - start));
  }

  bool at_line_end() {
    skip_ws();
    if (pos_ >= s_.size()) return true;
    return s_[pos_] == '#';  // trailing comment tolerated
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() &&
           (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r'))
      ++pos_;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

struct ScannedLine {
  enum class Kind { Prose, Question, Statement, Malformed } kind;
  std::string question;
  CallStatement stmt;
  FormatErrorReason reason{};
  std::string message;
};

ScannedLine scan_line(std::string_view line) {
  LineScanner sc(line);
  auto target = sc.ident();
  if (!target || !sc.consume('=')) return {ScannedLine::Kind::Prose};

  if (*target == "question") {
    auto q = sc.quoted();
    if (q && sc.at_line_end())
      return {ScannedLine::Kind::Question, *q};
    return {ScannedLine::Kind::Prose};
  }

  auto fname = sc.ident();
  if (!fname || !sc.consume('(')) return {ScannedLine::Kind::Prose};

  auto fn = metafn_from_name(*fname);
  if (!fn)
    return {ScannedLine::Kind::Malformed, "", {}, FormatErrorReason::UnknownFunction,
            "unknown function '" + *fname + "'"};

  CallStatement stmt;
  stmt.target_var = *target;
  stmt.func = *fn;
  if (!sc.peek(')')) {
    while (true) {
      if (auto q = sc.quoted()) {
        stmt.args.push_back(CallArg::str(*q));
      } else if (auto num = sc.number()) {
        stmt.args.push_back(CallArg::str(*num));
      } else if (auto id = sc.ident()) {
        stmt.args.push_back(CallArg::var(*id));
      } else {
        return {ScannedLine::Kind::Prose};  // unlexable argument: not a statement
      }
      if (sc.consume(',')) continue;
      break;
    }
  }
  if (!sc.consume(')') || !sc.at_line_end()) return {ScannedLine::Kind::Prose};

  if (stmt.args.size() != arity_of(*fn))
    return {ScannedLine::Kind::Malformed, "", {}, FormatErrorReason::BadArity,
            std::string(to_string(*fn)) + " takes " +
                std::to_string(arity_of(*fn)) + " argument(s), got " +
                std::to_string(stmt.args.size())};

  if (*fn == MetaFn::Arg) {
    const CallArg& op = stmt.args[0];
    if (op.kind != CallArg::Kind::StringLit ||
        (op.value != "ARGMAX" && op.value != "ARGMIN"))
      return {ScannedLine::Kind::Malformed, "", {}, FormatErrorReason::BadEnumArg,
              "ARG operator must be 'ARGMAX' or 'ARGMIN'"};
  }
  if (*fn == MetaFn::Cmp) {
    const CallArg& op = stmt.args[0];
    if (op.kind != CallArg::Kind::StringLit ||
        (op.value != "<" && op.value != "<=" && op.value != ">" &&
         op.value != ">="))
      return {ScannedLine::Kind::Malformed, "", {}, FormatErrorReason::BadEnumArg,
              "CMP operator must be one of '<', '<=', '>', '>='"};
  }
  return {ScannedLine::Kind::Statement, "", std::move(stmt)};
}

}  // namespace

std::string_view to_string(MetaFn fn) {
  switch (fn) {
    case MetaFn::Start: return "START";
    case MetaFn::Join: return "JOIN";
    case MetaFn::And: return "AND";
    case MetaFn::Arg: return "ARG";
    case MetaFn::Cmp: return "CMP";
    case MetaFn::Count: return "COUNT";
    case MetaFn::Stop: return "STOP";
  }
  return "";
}

std::string_view to_string(FormatErrorReason reason) {
  switch (reason) {
    case FormatErrorReason::NoStatements: return "no_statements";
    case FormatErrorReason::BadArity: return "bad_arity";
    case FormatErrorReason::UnknownFunction: return "unknown_function";
    case FormatErrorReason::UseBeforeDef: return "use_before_def";
    case FormatErrorReason::MissingStop: return "missing_stop";
    case FormatErrorReason::BadEnumArg: return "bad_enum_arg";
    case FormatErrorReason::TypeViolation: return "type_violation";
  }
  return "";
}

CallSequence parse_callseq(std::string_view text) {
  CallSequence seq;
  std::set<std::string> defined;
  bool saw_stop = false;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    line = trim(line);
    if (line.empty()) continue;

    ScannedLine scanned = scan_line(line);
    switch (scanned.kind) {
      case ScannedLine::Kind::Prose:
        continue;
      case ScannedLine::Kind::Question:
        if (!seq.question && seq.statements.empty())
          seq.question = scanned.question;
        continue;
      case ScannedLine::Kind::Malformed:
        throw FormatError(scanned.reason, scanned.message);
      case ScannedLine::Kind::Statement:
        break;
    }

    CallStatement stmt = std::move(scanned.stmt);
    for (const CallArg& arg : stmt.args) {
      if (arg.kind == CallArg::Kind::VarRef && !defined.count(arg.value))
        throw FormatError(FormatErrorReason::UseBeforeDef,
                          "variable '" + arg.value + "' used before definition");
    }
    defined.insert(stmt.target_var);
    bool is_stop = stmt.func == MetaFn::Stop;
    seq.statements.push_back(std::move(stmt));
    if (is_stop) {
      saw_stop = true;
      break;  // anything after the terminating STOP is ignored
    }
  }

  if (seq.statements.empty())
    throw FormatError(FormatErrorReason::NoStatements,
                      "no call statements found");
  if (!saw_stop)
    throw FormatError(FormatErrorReason::MissingStop,
                      "program does not end with STOP");
  return seq;
}

SExprPtr interpret(const CallSequence& seq) {
  std::map<std::string, SExprPtr> env;
  SExprPtr result;

  auto as_set = [&](const CallArg& arg) -> SExprPtr {
    if (arg.kind == CallArg::Kind::StringLit) return make_entity(arg.value);
    return env.at(arg.value);  // definedness guaranteed by parse
  };
  auto as_relation = [&](const CallArg& arg) -> RelRef {
    if (arg.kind != CallArg::Kind::StringLit)
      throw FormatError(FormatErrorReason::TypeViolation,
                        "relation argument must be a string literal");
    return RelRef{arg.value, Orientation::Forward};
  };

  for (const CallStatement& stmt : seq.statements) {
    SExprPtr value;
    switch (stmt.func) {
      case MetaFn::Start:
        value = as_set(stmt.args[0]);
        break;
      case MetaFn::Join:
        value = make_join(as_relation(stmt.args[0]), as_set(stmt.args[1]));
        break;
      case MetaFn::And:
        value = make_and(as_set(stmt.args[0]), as_set(stmt.args[1]));
        break;
      case MetaFn::Arg:
        value = make_arg(stmt.args[0].value == "ARGMAX" ? ArgOp::Max : ArgOp::Min,
                         as_set(stmt.args[1]), as_relation(stmt.args[2]));
        break;
      case MetaFn::Cmp: {
        CmpOp op = stmt.args[0].value == "<"    ? CmpOp::Lt
                   : stmt.args[0].value == "<=" ? CmpOp::Le
                   : stmt.args[0].value == ">"  ? CmpOp::Gt
                                                : CmpOp::Ge;
        SExprPtr value_child =
            stmt.args[2].kind == CallArg::Kind::StringLit
                ? classify_value_text(stmt.args[2].value)
                : env.at(stmt.args[2].value);
        value = make_cmp(op, as_relation(stmt.args[1]), std::move(value_child));
        break;
      }
      case MetaFn::Count:
        value = make_count(as_set(stmt.args[0]));
        break;
      case MetaFn::Stop:
        result = as_set(stmt.args[0]);
        break;
    }
    if (stmt.func != MetaFn::Stop) env[stmt.target_var] = value;
  }

  if (!result)
    throw FormatError(FormatErrorReason::MissingStop,
                      "program does not end with STOP");

  auto violations = validate_types(*result);
  if (!violations.empty())
    throw FormatError(FormatErrorReason::TypeViolation,
                      violations.front().constraint + " (at " +
                          violations.front().path + ")");
  return result;
}

// ---------------------------------------------------------------------------
// Compilation (tree -> statements)

namespace {

class Compiler {
 public:
  std::vector<CallStatement> run(const SExpr& root) {
    emit_into(root, fresh_var());
    statements_.push_back({"expression", MetaFn::Stop, {CallArg::var("expression")}});
    return std::move(statements_);
  }

 private:
  std::string fresh_var() {
    std::string name =
        next_var_ == 0 ? "expression" : "expression" + std::to_string(next_var_);
    ++next_var_;
    return name;
  }

  void push(const std::string& var, MetaFn fn, std::vector<CallArg> args) {
    statements_.push_back({var, fn, std::move(args)});
  }

  void emit_into(const SExpr& e, const std::string& var) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, EntityRef>) {
            push(var, MetaFn::Start, {CallArg::str(n.name)});
          } else if constexpr (std::is_same_v<T, Join>) {
            emit_into(*n.sub, var);
            push(var, MetaFn::Join,
                 {CallArg::str(n.relation.name), CallArg::var(var)});
          } else if constexpr (std::is_same_v<T, And>) {
            emit_into(*n.lhs, var);
            std::string rhs_var = fresh_var();
            emit_into(*n.rhs, rhs_var);
            push(var, MetaFn::And, {CallArg::var(var), CallArg::var(rhs_var)});
          } else if constexpr (std::is_same_v<T, Cmp>) {
            if (const auto* lit = n.value->template get_if<LiteralVal>()) {
              push(var, MetaFn::Cmp,
                   {CallArg::str(std::string(to_string(n.op))),
                    CallArg::str(n.relation.name), CallArg::str(lit->text)});
            } else {
              emit_into(*n.value, var);
              push(var, MetaFn::Cmp,
                   {CallArg::str(std::string(to_string(n.op))),
                    CallArg::str(n.relation.name), CallArg::var(var)});
            }
          } else if constexpr (std::is_same_v<T, Arg>) {
            emit_into(*n.sub, var);
            push(var, MetaFn::Arg,
                 {CallArg::str(std::string(to_string(n.op))), CallArg::var(var),
                  CallArg::str(n.relation.name)});
          } else if constexpr (std::is_same_v<T, Count>) {
            emit_into(*n.sub, var);
            push(var, MetaFn::Count, {CallArg::var(var)});
          } else {
            // LiteralVal as a serialization root is rejected upstream.
            push(var, MetaFn::Start, {CallArg::str(n.text)});
          }
        },
        e.node());
  }

  std::vector<CallStatement> statements_;
  int next_var_ = 0;
};

void append_quoted_py(std::string& out, std::string_view s) {
  out += '\'';
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '\'';
}

}  // namespace

CallSequence compile_to_callseq(const SExpr& expr,
                                std::optional<std::string> question) {
  CallSequence seq;
  seq.question = std::move(question);
  seq.statements = Compiler().run(expr);
  return seq;
}

std::string render_callseq(const CallSequence& seq) {
  std::string out;
  if (seq.question) {
    out += "question = ";
    append_quoted_py(out, *seq.question);
    out += '\n';
  }
  for (const CallStatement& stmt : seq.statements) {
    out += stmt.target_var;
    out += " = ";
    out += to_string(stmt.func);
    out += '(';
    for (std::size_t i = 0; i < stmt.args.size(); ++i) {
      if (i) out += ", ";
      if (stmt.args[i].kind == CallArg::Kind::StringLit)
        append_quoted_py(out, stmt.args[i].value);
      else
        out += stmt.args[i].value;
    }
    out += ")\n";
  }
  return out;
}

FormatVerdict check_format(std::string_view raw_llm_output) noexcept {
  try {
    CallSequence seq = parse_callseq(raw_llm_output);
    (void)interpret(seq);
    return {true, std::nullopt};
  } catch (const FormatError& e) {
    return {false, e.reason};
  } catch (...) {
    return {false, FormatErrorReason::TypeViolation};
  }
}

}  // namespace kbqa
