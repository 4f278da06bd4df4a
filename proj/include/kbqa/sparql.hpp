#pragma once

#include <stdexcept>
#include <string>

#include "kbqa/kb.hpp"
#include "kbqa/sexpr.hpp"

namespace kbqa {

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EndpointError : std::runtime_error {
  enum class Kind { Http, Parse, Timeout };
  EndpointError(Kind k, const std::string& msg)
      : std::runtime_error(msg), kind(k) {}
  Kind kind;
};

/// Compiles a grounded expression to a SELECT query over the fragment
/// documented in docs/sparql-mapping.md. Deterministic: variables are
/// numbered ?x0, ?x1, ... in depth-first visit order, so identical trees
/// yield byte-identical queries.
std::string compile_sparql(const SExpr& grounded);

struct SparqlEndpointConfig {
  std::string url;  // full endpoint URL, e.g. http://127.0.0.1:8890/sparql
  int timeout_sec = 10;
};

/// SPARQL-protocol client: form-encoded POST, JSON results. Safe for
/// bounded-parallel probes (one connection per request).
class SparqlEndpointClient {
 public:
  explicit SparqlEndpointClient(SparqlEndpointConfig cfg);

  Denotation execute(const SExpr& grounded) const;
  Denotation execute_query(const std::string& sparql, bool count_root) const;

 private:
  SparqlEndpointConfig cfg_;
  std::string host_;
  std::string path_;
};

/// Uniform execution surface over the two backends.
class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;
  virtual Denotation execute(const SExpr& grounded) const = 0;
};

class InMemoryBackend final : public ExecutionBackend {
 public:
  explicit InMemoryBackend(const TripleStore& store) : store_(&store) {}
  Denotation execute(const SExpr& grounded) const override {
    return eval_direct(grounded, *store_);
  }

 private:
  const TripleStore* store_;
};

class EndpointBackend final : public ExecutionBackend {
 public:
  explicit EndpointBackend(SparqlEndpointConfig cfg) : client_(std::move(cfg)) {}
  Denotation execute(const SExpr& grounded) const override {
    return client_.execute(grounded);
  }

 private:
  SparqlEndpointClient client_;
};

}  // namespace kbqa
