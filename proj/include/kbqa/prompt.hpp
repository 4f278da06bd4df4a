#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbqa/callseq.hpp"
#include "kbqa/embedding.hpp"
#include "kbqa/linking.hpp"
#include "kbqa/sexpr.hpp"

namespace kbqa {

struct InsufficientData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The fixed instruction block: a task comment plus the seven function
/// definitions the model is asked to call.
const std::string& instruction_text();

struct TrainingPair {
  std::string question;
  std::string sexpr_text;
};

std::vector<TrainingPair> load_training_pairs(const std::filesystem::path& path);

/// One worked example: a question, its logical form with entity identifiers
/// already replaced by surface names, and the rendered call sequence
/// (always equal to compile_to_callseq(gold, question)).
struct DemoExample {
  std::string question;
  SExprPtr gold;
  CallSequence rendered;
};

/// Everything a prompt is assembled from; serialization order is
/// instruction, demos, hint comment, query line.
struct PromptBundle {
  std::string instruction;  // empty = omitted (instruction ablation)
  std::vector<DemoExample> demos;
  std::vector<std::string> relation_hints;
  std::string query_question;
};

enum class DemoMode { FixedRandom, Similar };

/// Embedding index over the training-pool questions, for similarity-ranked
/// demo selection.
class QuestionIndex {
 public:
  QuestionIndex(const std::vector<TrainingPair>& pool,
                const EmbeddingProvider& embed);

  /// Pool positions ranked by similarity to the query, most similar first.
  /// Demo selection passes exclude_exact to keep an overlapping test
  /// question out of its own prompt.
  std::vector<std::size_t> rank(const std::string& query,
                                const std::vector<TrainingPair>& pool,
                                std::size_t k, const EmbeddingProvider& embed,
                                bool exclude_exact = false) const;

 private:
  VectorIndex index_;
};

using NameMapper = std::function<std::optional<std::string>(const std::string&)>;

/// Turns one training pair into a demo: parse, map identifiers to surface
/// names, compile. Throws ParseError when the gold form does not parse.
DemoExample make_demo(const TrainingPair& pair, const NameMapper& mapper);

/// Selects k demos. FixedRandom draws once per seed, order as sampled;
/// Similar ranks by question similarity in descending order. Throws
/// InsufficientData when k exceeds the usable pool.
std::vector<DemoExample> build_demos(const std::vector<TrainingPair>& pool,
                                     std::size_t k, DemoMode mode,
                                     std::uint64_t seed,
                                     const std::string& query_question,
                                     const QuestionIndex* similarity_index,
                                     const EmbeddingProvider* embed,
                                     const NameMapper& mapper);

/// Top-r relation names for the whole question text, used as a reference
/// comment in the prompt. r = 0 yields no hints.
std::vector<std::string> build_relation_hints(const std::string& query,
                                              const RelationIndex& index,
                                              const EmbeddingProvider& embed,
                                              std::size_t r = 1);

/// Byte-exact prompt assembly: blocks joined by single blank lines, hint
/// block rendered as a triple-quoted comment, final line the bare
/// `question = '...'` the model must complete.
std::string render_prompt(const PromptBundle& bundle);

}  // namespace kbqa
