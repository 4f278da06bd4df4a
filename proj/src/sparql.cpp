#include "kbqa/sparql.hpp"

#include <charconv>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace kbqa {

using nlohmann::json;

namespace {

std::string iri(const std::string& id) {
  for (char c : id)
    if (c == '<' || c == '>' || c == '"' || c == ' ' || c == '\n' || c == '\t')
      throw CompileError("identifier not expressible as an IRI: '" + id + "'");
  if (id.empty()) throw CompileError("empty identifier");
  return "<" + id + ">";
}

std::string sparql_literal(const LiteralVal& lit) {
  std::string out = "\"";
  for (char c : lit.text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  switch (lit.datatype) {
    case Datatype::Integer: out += "^^xsd:integer"; break;
    case Datatype::Float: out += "^^xsd:double"; break;
    case Datatype::Datetime: out += "^^xsd:dateTime"; break;
    case Datatype::Plain: break;
  }
  return out;
}

class SparqlCompiler {
 public:
  std::string run(const SExpr& root) {
    std::string result_var;
    std::string body;
    if (const auto* count = root.get_if<Count>()) {
      result_var = fresh();
      emit(*count->sub, result_var, body);
      return "SELECT (COUNT(DISTINCT ?" + result_var + ") AS ?cnt) WHERE { " +
             body + "}";
    }
    result_var = fresh();
    emit(root, result_var, body);
    return "SELECT DISTINCT ?" + result_var + " WHERE { " + body + "}";
  }

 private:
  std::string fresh() { return "x" + std::to_string(next_var_++); }

  void emit(const SExpr& e, const std::string& var, std::string& out) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, EntityRef>) {
            out += "VALUES ?" + var + " { " + iri(n.name) + " } ";
          } else if constexpr (std::is_same_v<T, Join>) {
            std::string sub_var = fresh();
            emit(*n.sub, sub_var, out);
            if (n.relation.orientation == Orientation::Forward)
              out += "?" + var + " " + iri(n.relation.name) + " ?" + sub_var + " . ";
            else
              out += "?" + sub_var + " " + iri(n.relation.name) + " ?" + var + " . ";
          } else if constexpr (std::is_same_v<T, And>) {
            emit(*n.lhs, var, out);
            emit(*n.rhs, var, out);
          } else if constexpr (std::is_same_v<T, Cmp>) {
            const auto* lit = n.value->template get_if<LiteralVal>();
            if (!lit)
              throw CompileError(
                  "comparison against a set-typed value is not executable");
            std::string val_var = fresh();
            if (n.relation.orientation == Orientation::Forward)
              out += "?" + var + " " + iri(n.relation.name) + " ?" + val_var + " . ";
            else
              out += "?" + val_var + " " + iri(n.relation.name) + " ?" + var + " . ";
            out += "FILTER(?" + val_var + " " + std::string(to_string(n.op)) +
                   " " + sparql_literal(*lit) + ") ";
          } else if constexpr (std::is_same_v<T, Arg>) {
            std::string inner;
            std::string val_var = fresh();
            emit(*n.sub, var, inner);
            if (n.relation.orientation == Orientation::Forward)
              inner += "?" + var + " " + iri(n.relation.name) + " ?" + val_var + " . ";
            else
              inner += "?" + val_var + " " + iri(n.relation.name) + " ?" + var + " . ";
            const char* dir = n.op == ArgOp::Max ? "DESC" : "ASC";
            out += "{ SELECT ?" + var + " WHERE { " + inner + "} ORDER BY " +
                   dir + "(?" + val_var + ") ASC(?" + var + ") LIMIT 1 } ";
          } else {
            throw CompileError("COUNT is only supported at the query root");
          }
        },
        e.node());
  }

  int next_var_ = 0;
};

}  // namespace

std::string compile_sparql(const SExpr& grounded) {
  auto violations = validate_types(grounded);
  if (!violations.empty())
    throw CompileError("expression is not well-typed: " +
                       violations.front().constraint);
  return SparqlCompiler().run(grounded);
}

// ---------------------------------------------------------------------------
// Endpoint client

SparqlEndpointClient::SparqlEndpointClient(SparqlEndpointConfig cfg)
    : cfg_(std::move(cfg)) {
  // Split scheme://host[:port] from the path.
  std::size_t scheme = cfg_.url.find("://");
  std::size_t slash =
      cfg_.url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) {
    host_ = cfg_.url;
    path_ = "/";
  } else {
    host_ = cfg_.url.substr(0, slash);
    path_ = cfg_.url.substr(slash);
  }
  if (host_.empty())
    throw EndpointError(EndpointError::Kind::Http, "endpoint URL is empty");
}

Denotation SparqlEndpointClient::execute(const SExpr& grounded) const {
  return execute_query(compile_sparql(grounded), grounded.is<Count>());
}

Denotation SparqlEndpointClient::execute_query(const std::string& sparql,
                                               bool count_root) const {
  httplib::Client client(host_);
  client.set_connection_timeout(cfg_.timeout_sec, 0);
  client.set_read_timeout(cfg_.timeout_sec, 0);
  client.set_write_timeout(cfg_.timeout_sec, 0);

  httplib::Params params{{"query", sparql}};
  httplib::Headers headers{{"Accept", "application/sparql-results+json"}};
  auto res = client.Post(path_, headers, params);
  if (!res) {
    auto err = res.error();
    bool timeout = err == httplib::Error::ConnectionTimeout ||
                   err == httplib::Error::Read || err == httplib::Error::Write;
    throw EndpointError(timeout ? EndpointError::Kind::Timeout
                                : EndpointError::Kind::Http,
                        "endpoint request failed: " + httplib::to_string(err));
  }
  if (res->status != 200)
    throw EndpointError(EndpointError::Kind::Http,
                        "endpoint returned status " + std::to_string(res->status));

  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("results") ||
      !reply["results"].contains("bindings"))
    throw EndpointError(EndpointError::Kind::Parse,
                        "malformed SPARQL results document");

  Denotation out;
  const json& bindings = reply["results"]["bindings"];
  if (count_root) {
    if (bindings.empty() || !bindings[0].contains("cnt"))
      throw EndpointError(EndpointError::Kind::Parse,
                          "count query returned no ?cnt binding");
    const std::string text = bindings[0]["cnt"]["value"].get<std::string>();
    std::uint64_t n = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc{} || ptr != text.data() + text.size())
      throw EndpointError(EndpointError::Kind::Parse,
                          "count binding is not a natural number: " + text);
    out.count = n;
    return out;
  }
  for (const json& row : bindings) {
    if (!row.contains("x0")) continue;
    out.items.insert(row["x0"]["value"].get<std::string>());
  }
  return out;
}

}  // namespace kbqa
