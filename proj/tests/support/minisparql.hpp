#pragma once

// Test-only SPARQL engine for the SELECT fragment the query compiler emits.
// It parses query text and evaluates it against a TripleStore through its
// own join/filter/order machinery, independent of eval_direct, so the two
// can be compared differentially.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kbqa/kb.hpp"

namespace minisparql {

struct Value {
  std::string text;
  std::optional<kbqa::Datatype> type;  // nullopt = IRI / entity id

  bool operator==(const Value&) const = default;
  bool operator<(const Value& o) const {
    if (type.has_value() != o.type.has_value()) return type.has_value() < o.type.has_value();
    if (type && *type != *o.type) return *type < *o.type;
    return text < o.text;
  }
};

struct Result {
  std::set<Value> rows;             // distinct projected values
  std::optional<std::uint64_t> count;  // set for COUNT projections
};

/// Parses and evaluates one query. Throws std::runtime_error on queries
/// outside the supported fragment.
Result run_query(const std::string& query, const kbqa::TripleStore& store);

/// SPARQL-protocol results document (application/sparql-results+json).
std::string results_to_json(const Result& result, const std::string& var);

}  // namespace minisparql
