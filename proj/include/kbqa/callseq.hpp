#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kbqa/sexpr.hpp"

namespace kbqa {

// The straight-line program language an LLM emits: one assignment per line,
// each calling one of the seven meta-functions. Interpreting a sequence
// builds the corresponding logical-form tree; compiling a tree emits the
// sequence back (the two directions are mutually inverse).

enum class MetaFn { Start, Join, And, Arg, Cmp, Count, Stop };

std::string_view to_string(MetaFn fn);

struct CallArg {
  enum class Kind { StringLit, VarRef } kind;
  std::string value;

  static CallArg str(std::string s) { return {Kind::StringLit, std::move(s)}; }
  static CallArg var(std::string s) { return {Kind::VarRef, std::move(s)}; }
  bool operator==(const CallArg&) const = default;
};

struct CallStatement {
  std::string target_var;
  MetaFn func;
  std::vector<CallArg> args;

  bool operator==(const CallStatement&) const = default;
};

struct CallSequence {
  std::optional<std::string> question;
  std::vector<CallStatement> statements;

  bool operator==(const CallSequence&) const = default;
};

enum class FormatErrorReason {
  NoStatements,
  BadArity,
  UnknownFunction,
  UseBeforeDef,
  MissingStop,
  BadEnumArg,
  TypeViolation,
};

std::string_view to_string(FormatErrorReason reason);

struct FormatError : std::runtime_error {
  FormatError(FormatErrorReason r, const std::string& msg)
      : std::runtime_error(msg), reason(r) {}
  FormatErrorReason reason;
};

/// Extracts a call-sequence program from raw model output. Lines that do not
/// match the statement grammar (prose, markdown fences, ...) are skipped;
/// extraction ends at the first STOP statement. Throws FormatError when no
/// valid terminated program can be recovered.
CallSequence parse_callseq(std::string_view text);

/// Executes the statements over a variable environment and returns the
/// expression bound at STOP. Throws FormatError(TypeViolation) when the
/// resulting tree fails validate_types.
SExprPtr interpret(const CallSequence& seq);

/// Bottom-up serialization: one statement per non-leaf node plus START per
/// entity leaf, parallel branches named expression, expression1, ..., and a
/// final STOP. interpret(compile_to_callseq(e, q)) == e.
CallSequence compile_to_callseq(const SExpr& expr,
                                std::optional<std::string> question);

/// Renders the question line (when present) and statements, one per line
/// with single-quoted string literals.
std::string render_callseq(const CallSequence& seq);

struct FormatVerdict {
  bool ok = false;
  std::optional<FormatErrorReason> reason;
};

/// Total check used for the format-error metric: ok iff the raw output
/// parses, interprets, and type-checks. Never throws.
FormatVerdict check_format(std::string_view raw_llm_output) noexcept;

}  // namespace kbqa
