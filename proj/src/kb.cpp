#include "kbqa/kb.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

#include "kbqa/errors.hpp"

namespace kbqa {

const std::vector<std::size_t> TripleStore::kNoRows;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

}  // namespace

TripleStore TripleStore::from_triples(std::vector<Triple> triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

  TripleStore store;
  store.triples_ = std::move(triples);
  for (std::size_t i = 0; i < store.triples_.size(); ++i)
    store.relation_index_[store.triples_[i].relation].push_back(i);
  return store;
}

TripleStore TripleStore::load(const std::filesystem::path& tsv) {
  std::ifstream in(tsv);
  if (!in) throw ParseError("cannot open file", tsv.string(), 0);

  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4)
      throw ParseError("expected 'head<TAB>relation<TAB>tail[<TAB>datatype]'",
                       tsv.string(), line_no);
    Triple t{fields[0], fields[1], fields[2], std::nullopt};
    if (fields.size() == 4) {
      auto dt = datatype_from_string(fields[3]);
      if (!dt)
        throw ParseError("unknown datatype '" + fields[3] + "'", tsv.string(),
                         line_no);
      t.tail_type = dt;
    }
    if (t.head.empty() || t.relation.empty())
      throw ParseError("empty head or relation", tsv.string(), line_no);
    triples.push_back(std::move(t));
  }
  return from_triples(std::move(triples));
}

const std::vector<std::size_t>& TripleStore::by_relation(
    const std::string& relation) const {
  auto it = relation_index_.find(relation);
  return it == relation_index_.end() ? kNoRows : it->second;
}

TripleStore TripleStore::reversed() const {
  std::vector<Triple> flipped;
  flipped.reserve(triples_.size());
  for (const Triple& t : triples_)
    flipped.push_back({t.tail, t.relation, t.head, std::nullopt});
  return from_triples(std::move(flipped));
}

// ---------------------------------------------------------------------------
// Value ordering and comparison

namespace {

int value_class(const KbValue& v) {
  if (!v.literal_type) return 3;  // entity id
  switch (*v.literal_type) {
    case Datatype::Integer:
    case Datatype::Float:
      return 0;
    case Datatype::Datetime:
      return 1;
    case Datatype::Plain:
      return 2;
  }
  return 2;
}

std::string normalize_datetime(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<long double> numeric_value(const KbValue& v) {
  if (value_class(v) != 0) return std::nullopt;
  try {
    std::size_t consumed = 0;
    long double parsed = std::stold(v.text, &consumed);
    if (consumed != v.text.size()) return std::nullopt;
    return parsed;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace

int compare_values(const KbValue& a, const KbValue& b) {
  int ca = value_class(a), cb = value_class(b);
  if (ca != cb) return ca < cb ? -1 : 1;
  if (ca == 0) {
    auto na = numeric_value(a), nb = numeric_value(b);
    if (na && nb) return *na < *nb ? -1 : (*na == *nb ? 0 : 1);
  }
  std::string ta = ca == 1 ? normalize_datetime(a.text) : a.text;
  std::string tb = cb == 1 ? normalize_datetime(b.text) : b.text;
  int c = ta.compare(tb);
  return c < 0 ? -1 : (c == 0 ? 0 : 1);
}

// ---------------------------------------------------------------------------
// Direct evaluation

namespace {

struct ValueLess {
  bool operator()(const KbValue& a, const KbValue& b) const {
    bool la = a.literal_type.has_value(), lb = b.literal_type.has_value();
    if (la != lb) return la < lb;
    if (la && *a.literal_type != *b.literal_type)
      return *a.literal_type < *b.literal_type;
    return a.text < b.text;
  }
};
using ValueSet = std::set<KbValue, ValueLess>;

KbValue tail_value(const Triple& t) { return {t.tail, t.tail_type}; }
KbValue head_value(const Triple& t) { return {t.head, std::nullopt}; }

bool cmp_matches(CmpOp op, const KbValue& value, const LiteralVal& literal) {
  KbValue lit_kv{literal.text, literal.datatype};
  // Comparable only within the literal's class: numbers against numbers,
  // datetimes against datetimes.
  if (value_class(value) != value_class(lit_kv)) return false;
  int c = compare_values(value, lit_kv);
  switch (op) {
    case CmpOp::Lt: return c < 0;
    case CmpOp::Le: return c <= 0;
    case CmpOp::Gt: return c > 0;
    case CmpOp::Ge: return c >= 0;
  }
  return false;
}

class DirectEvaluator {
 public:
  explicit DirectEvaluator(const TripleStore& store) : store_(store) {}

  ValueSet eval_set(const SExpr& e) {
    return std::visit(
        [&](const auto& n) -> ValueSet {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, EntityRef>) {
            return ValueSet{KbValue{n.name, std::nullopt}};
          } else if constexpr (std::is_same_v<T, Join>) {
            return eval_join(n);
          } else if constexpr (std::is_same_v<T, And>) {
            ValueSet lhs = eval_set(*n.lhs);
            ValueSet rhs = eval_set(*n.rhs);
            ValueSet out;
            std::set_intersection(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
                                  std::inserter(out, out.begin()), ValueLess{});
            return out;
          } else if constexpr (std::is_same_v<T, Cmp>) {
            return eval_cmp(n);
          } else if constexpr (std::is_same_v<T, Arg>) {
            return eval_arg(n);
          } else {
            throw std::logic_error(
                "COUNT and literals cannot appear in set position");
          }
        },
        e.node());
  }

 private:
  // Forward: heads whose tail lies in the operand set; reverse walks the
  // triple the other way.
  ValueSet eval_join(const Join& n) {
    ValueSet sub = eval_set(*n.sub);
    ValueSet out;
    for (std::size_t row : store_.by_relation(n.relation.name)) {
      const Triple& t = store_.triples()[row];
      if (n.relation.orientation == Orientation::Forward) {
        if (sub.count(tail_value(t))) out.insert(head_value(t));
      } else {
        if (sub.count(head_value(t))) out.insert(tail_value(t));
      }
    }
    return out;
  }

  ValueSet eval_cmp(const Cmp& n) {
    const auto* literal = n.value->get_if<LiteralVal>();
    if (!literal)
      throw std::logic_error(
          "comparison against a set-typed value is rejected at grounding");
    if (literal->datatype == Datatype::Plain)
      throw EvalError(EvalError::Kind::UntypedLiteralComparison,
                      "comparison literal '" + literal->text +
                          "' has no comparable datatype");
    ValueSet out;
    for (std::size_t row : store_.by_relation(n.relation.name)) {
      const Triple& t = store_.triples()[row];
      if (n.relation.orientation == Orientation::Forward) {
        if (cmp_matches(n.op, tail_value(t), *literal)) out.insert(head_value(t));
      } else {
        if (cmp_matches(n.op, head_value(t), *literal)) out.insert(tail_value(t));
      }
    }
    return out;
  }

  ValueSet eval_arg(const Arg& n) {
    ValueSet domain = eval_set(*n.sub);
    if (domain.empty())
      throw EvalError(EvalError::Kind::ArgOverEmptySet,
                      std::string(to_string(n.op)) + " over an empty set");

    // Row-based selection: every (element, value) edge competes, so an
    // element with several values is represented by its best one. Ties on
    // the value go to the smaller element text.
    std::optional<KbValue> best_elem;
    std::optional<KbValue> best_value;
    for (std::size_t row : store_.by_relation(n.relation.name)) {
      const Triple& t = store_.triples()[row];
      KbValue elem = n.relation.orientation == Orientation::Forward
                         ? head_value(t)
                         : tail_value(t);
      KbValue value = n.relation.orientation == Orientation::Forward
                          ? tail_value(t)
                          : head_value(t);
      if (!domain.count(elem)) continue;
      bool take = false;
      if (!best_value) {
        take = true;
      } else {
        int c = compare_values(value, *best_value);
        if (n.op == ArgOp::Max ? c > 0 : c < 0)
          take = true;
        else if (c == 0 && elem.text < best_elem->text)
          take = true;
      }
      if (take) {
        best_elem = elem;
        best_value = value;
      }
    }
    ValueSet out;
    if (best_elem) out.insert(*best_elem);
    return out;
  }

  const TripleStore& store_;
};

}  // namespace

Denotation eval_direct(const SExpr& grounded, const TripleStore& store) {
  DirectEvaluator evaluator(store);
  Denotation result;
  if (const auto* count = grounded.get_if<Count>()) {
    result.count = evaluator.eval_set(*count->sub).size();
    return result;
  }
  for (const KbValue& v : evaluator.eval_set(grounded)) result.items.insert(v.text);
  return result;
}

}  // namespace kbqa
