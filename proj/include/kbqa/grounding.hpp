#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kbqa/callseq.hpp"
#include "kbqa/kb.hpp"
#include "kbqa/linking.hpp"
#include "kbqa/llm.hpp"
#include "kbqa/prompt.hpp"
#include "kbqa/sexpr.hpp"
#include "kbqa/sparql.hpp"

namespace kbqa {

using AnswerSet = std::set<std::string>;

/// One point of the candidate product: the chosen candidate per slot
/// (entity slots first, then relation slots, both in mention order).
struct GroundingAssignment {
  std::vector<Candidate> tuple;
  std::vector<std::size_t> ranks;  // per-slot candidate index
};

struct GroundingOptions {
  std::uint64_t probe_budget = 2000;
  bool count_zero_is_empty = true;  // a zero count keeps enumeration going
};

struct EnumerationResult {
  std::optional<AnswerSet> answer;
  std::optional<std::string> grounded_expr;  // canonical text of the hit
  std::optional<GroundingAssignment> assignment;
  std::uint64_t probes = 0;
  bool budget_exhausted = false;
};

/// Full size of the candidate product (saturating at uint64 max).
std::uint64_t product_size(const std::vector<CandidateSlot>& slots);

/// Walks the candidate product as a mixed-radix odometer (rightmost slot
/// fastest, candidates in rank order), substitutes each tuple into the
/// expression, executes it, and stops at the first non-empty result.
/// Execution failures on a tuple consume budget and enumeration continues.
EnumerationResult enumerate_and_execute(const SExpr& expr,
                                        const std::vector<CandidateSlot>& slots,
                                        const ExecutionBackend& backend,
                                        const GroundingOptions& opts);

/// Most frequent present answer set; ties go to the earliest sample. All
/// absent yields absent.
std::optional<AnswerSet> majority_vote(
    const std::vector<std::optional<AnswerSet>>& per_sample_answers);

struct SampleOutcome {
  std::string raw_text;
  std::string verdict;  // "answered", "empty", "format_error", "grounding_error"
  std::optional<FormatErrorReason> format_reason;
  std::optional<std::string> callseq_text;   // normalized program, when parsed
  std::optional<std::string> grounded_expr;  // canonical text, when answered
  std::optional<AnswerSet> answer;
  std::uint64_t probes = 0;
};

struct AnswerRecord {
  std::string qid;
  std::string question;
  std::string prompt;  // retained only when the pipeline echoes prompts
  std::vector<SampleOutcome> samples;
  std::optional<AnswerSet> final_answer;
  std::optional<std::string> final_expr;
  std::uint64_t probes_used = 0;
};

/// Everything answer_question needs, owned elsewhere.
struct PipelineContext {
  const EntityCatalog* catalog = nullptr;
  const RelationIndex* relations = nullptr;
  const std::vector<TrainingPair>* train_pool = nullptr;
  const QuestionIndex* question_index = nullptr;  // for similar demo mode
  const EmbeddingProvider* embedder = nullptr;
  LlmProvider* llm = nullptr;
  const ExecutionBackend* backend = nullptr;
};

struct QuestionConfig {
  std::size_t k_shots = 40;
  DemoMode demo_mode = DemoMode::FixedRandom;
  std::uint64_t seed = 1;
  std::size_t num_hints = 1;
  std::size_t m_e = 15;
  std::size_t m_r = 100;
  SamplingConfig sampling;
  GroundingOptions grounding;
  bool ablate_instruction = false;
  bool ablate_relations = false;
  bool ablate_examples = false;
  bool echo_prompt = false;
  bool oracle_selection = false;  // pick the best-F1 sample against gold
  const std::vector<DemoExample>* fixed_demos = nullptr;  // sampled once per run
};

/// The full per-question pipeline: prompt, K samples, per-sample
/// parse/interpret/link/enumerate, and the final vote. Per-sample failures
/// are recorded, never thrown.
AnswerRecord answer_question(const std::string& qid, const std::string& question,
                             const PipelineContext& ctx,
                             const QuestionConfig& cfg,
                             const AnswerSet* gold_for_oracle = nullptr);

}  // namespace kbqa
