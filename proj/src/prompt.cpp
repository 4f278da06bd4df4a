#include "kbqa/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace kbqa {

const std::string& instruction_text() {
  static const std::string text =
      "'''\n"
      "Please use the functions defined below to generate \n"
      "the expression corresponding to the question step by step.\n"
      "'''\n"
      "def START(entity: str):\n"
      "    return entity\n"
      "\n"
      "def JOIN(relation: str, expression: str):\n"
      "    return '(JOIN {} {})'.format(relation, expression)\n"
      "\n"
      "def AND(expression:str, sub_expression: str):\n"
      "    return '(AND {} {})'.format(expression, sub_expression)\n"
      "\n"
      "def ARG(operator: str, expression: str, relation: str):\n"
      "    assert operator in ['ARGMAX', 'ARGMIN']\n"
      "    return '({} {} {})'.format(operator, expression, relation)\n"
      "\n"
      "def CMP(operator: str, relation: str, expression: str):\n"
      "    assert operator in ['<', '<=', '>', '>=']\n"
      "    return '({} {} {})'.format(operator, relation, expression)\n"
      "\n"
      "def COUNT(expression: str):\n"
      "    return '(COUNT {})'.format(expression)\n"
      "\n"
      "def STOP(expression: str):\n"
      "    return expression";
  return text;
}

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path.string(), 0);
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.contains("question") || !row.contains("sexpr"))
      throw ParseError("expected {\"question\", \"sexpr\"} object", path.string(),
                       line_no);
    pairs.push_back({row["question"].get<std::string>(),
                     row["sexpr"].get<std::string>()});
  }
  return pairs;
}

QuestionIndex::QuestionIndex(const std::vector<TrainingPair>& pool,
                             const EmbeddingProvider& embed)
    : index_(embed.dim()) {
  for (std::size_t i = 0; i < pool.size(); ++i)
    index_.add(std::to_string(i), embed.embed(pool[i].question));
}

std::vector<std::size_t> QuestionIndex::rank(const std::string& query,
                                             const std::vector<TrainingPair>& pool,
                                             std::size_t k,
                                             const EmbeddingProvider& embed,
                                             bool exclude_exact) const {
  auto hits = index_.top_k(embed.embed(query), index_.size());
  std::vector<std::size_t> out;
  for (const auto& hit : hits) {
    if (out.size() >= k) break;
    if (exclude_exact && pool[hit.row].question == query) continue;
    out.push_back(hit.row);
  }
  return out;
}

DemoExample make_demo(const TrainingPair& pair, const NameMapper& mapper) {
  SExprPtr gold;
  try {
    gold = parse_sexpr(pair.sexpr_text);
  } catch (const std::exception& e) {
    throw ParseError("bad training logical form for question '" + pair.question +
                     "': " + e.what());
  }
  if (mapper) {
    gold = map_entity_names(*gold, [&](const std::string& name) {
      return looks_like_mid(name) ? mapper(name) : std::nullopt;
    });
  }
  DemoExample demo;
  demo.question = pair.question;
  demo.gold = gold;
  demo.rendered = compile_to_callseq(*gold, pair.question);
  return demo;
}

namespace {

// Standard-library distributions are not pinned across implementations;
// draws must be reproducible from the seed alone.
std::vector<std::size_t> sampled_order(std::size_t n, std::size_t k,
                                       std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(gen() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

std::vector<DemoExample> build_demos(const std::vector<TrainingPair>& pool,
                                     std::size_t k, DemoMode mode,
                                     std::uint64_t seed,
                                     const std::string& query_question,
                                     const QuestionIndex* similarity_index,
                                     const EmbeddingProvider* embed,
                                     const NameMapper& mapper) {
  if (k > pool.size())
    throw InsufficientData("requested " + std::to_string(k) +
                           " demos from a pool of " + std::to_string(pool.size()));
  std::vector<std::size_t> chosen;
  if (k == 0) return {};
  if (mode == DemoMode::FixedRandom) {
    chosen = sampled_order(pool.size(), k, seed);
  } else {
    if (!similarity_index || !embed)
      throw std::invalid_argument("similar demo mode requires a question index");
    chosen = similarity_index->rank(query_question, pool, k, *embed,
                                    /*exclude_exact=*/true);
    if (chosen.size() < k)
      throw InsufficientData("pool has fewer than " + std::to_string(k) +
                             " distinct questions for similarity sampling");
  }
  std::vector<DemoExample> demos;
  demos.reserve(chosen.size());
  for (std::size_t i : chosen) demos.push_back(make_demo(pool[i], mapper));
  return demos;
}

std::vector<std::string> build_relation_hints(const std::string& query,
                                              const RelationIndex& index,
                                              const EmbeddingProvider& embed,
                                              std::size_t r) {
  if (r == 0) return {};
  std::vector<std::string> hints;
  for (const auto& hit : index.vectors().top_k(embed.embed(query), r))
    hints.push_back(hit.id);
  return hints;
}

std::string render_prompt(const PromptBundle& bundle) {
  std::vector<std::string> blocks;
  if (!bundle.instruction.empty()) blocks.push_back(bundle.instruction);

  for (const DemoExample& demo : bundle.demos) {
    std::string block = render_callseq(demo.rendered);
    if (!block.empty() && block.back() == '\n') block.pop_back();
    blocks.push_back(std::move(block));
  }

  if (!bundle.relation_hints.empty()) {
    std::string block = "'''\nSome relations for reference are as follows:";
    for (const std::string& hint : bundle.relation_hints) {
      block += '\n';
      block += hint;
    }
    block += "\n'''";
    blocks.push_back(std::move(block));
  }

  {
    CallSequence q;  // reuse the renderer's quoting for the query line
    q.question = bundle.query_question;
    std::string rendered = render_callseq(q);
    rendered.pop_back();  // trailing newline
    blocks.push_back(std::move(rendered));
  }

  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n\n";
    out += blocks[i];
  }
  out += '\n';
  return out;
}

}  // namespace kbqa
