#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbqa/sexpr.hpp"

namespace kbqa {

/// One KB edge. Literal tails carry a datatype; entity tails do not.
struct Triple {
  std::string head;
  std::string relation;
  std::string tail;
  std::optional<Datatype> tail_type;

  auto operator<=>(const Triple&) const = default;
};

/// Immutable in-memory triple set with per-relation adjacency, loaded from a
/// tab-separated fixture file (head, relation, tail[, datatype]).
class TripleStore {
 public:
  static TripleStore load(const std::filesystem::path& tsv);
  static TripleStore from_triples(std::vector<Triple> triples);

  const std::vector<Triple>& triples() const { return triples_; }
  std::size_t size() const { return triples_.size(); }

  /// Indexes of triples with the given relation (empty span if none).
  const std::vector<std::size_t>& by_relation(const std::string& relation) const;

  /// The same data with every edge flipped, for direction tests.
  TripleStore reversed() const;

 private:
  std::vector<Triple> triples_;
  std::map<std::string, std::vector<std::size_t>> relation_index_;
  static const std::vector<std::size_t> kNoRows;
};

struct EvalError : std::runtime_error {
  enum class Kind { UntypedLiteralComparison, ArgOverEmptySet };
  EvalError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

/// Result of executing a query: an entity/value set, or a count for
/// COUNT-rooted queries.
struct Denotation {
  std::set<std::string> items;
  std::optional<std::uint64_t> count;

  bool is_count() const { return count.has_value(); }
  bool empty() const { return count ? *count == 0 : items.empty(); }

  /// Uniform answer-set view: counts become a singleton of their decimal
  /// string.
  std::set<std::string> as_answer_set() const {
    if (count) return {std::to_string(*count)};
    return items;
  }

  bool operator==(const Denotation&) const = default;
};

/// Executes a grounded, well-typed expression directly over the store:
/// JOIN selects heads whose r-tail lies in the operand set (reverse
/// orientation walks tail-to-head), AND intersects, comparisons filter by
/// typed value, ARG keeps the single extremal element (ties to the smallest
/// id), COUNT returns cardinality.
Denotation eval_direct(const SExpr& grounded, const TripleStore& store);

// Value ordering shared by ARG and the SPARQL mapping (documented in
// docs/sparql-mapping.md): numbers < datetimes < plain strings < entity ids;
// numbers compare numerically, the rest lexicographically.
struct KbValue {
  std::string text;
  std::optional<Datatype> literal_type;  // nullopt = entity id

  bool operator==(const KbValue&) const = default;
};
int compare_values(const KbValue& a, const KbValue& b);

}  // namespace kbqa
