#pragma once

#include <memory>
#include <vector>

#include "kbqa/cache.hpp"
#include "kbqa/config.hpp"
#include "kbqa/eval.hpp"
#include "kbqa/grounding.hpp"

namespace kbqa {

/// Owns everything a run needs: indexes, providers, backend. Construction
/// loads all inputs; answering is thread-safe and deterministic given a
/// fixed configuration and the mock provider.
class Pipeline {
 public:
  static Pipeline from_config(const PipelineConfig& cfg);

  AnswerRecord answer(const std::string& qid, const std::string& question,
                      const AnswerSet* gold_for_oracle = nullptr) const;

  /// Answers every dataset record with bounded parallelism; output order
  /// matches input order regardless of scheduling.
  std::vector<AnswerRecord> run(const std::vector<EvalRecord>& dataset) const;

  const PipelineConfig& config() const { return cfg_; }
  const EntityCatalog& catalog() const { return indexes_.catalog; }
  const RelationIndex& relations() const { return indexes_.relations; }
  const EmbeddingProvider& embedder() const { return *embedder_; }

  /// The prompt the pipeline would send for a question (inspection).
  std::string prompt_for(const std::string& question) const;

 private:
  Pipeline() = default;
  QuestionConfig question_config() const;
  PipelineContext context() const;

  PipelineConfig cfg_;
  std::unique_ptr<EmbeddingProvider> embedder_;
  BuiltIndexes indexes_{EntityCatalog::from_parts({}, VectorIndex(0)),
                        RelationIndex::from_parts({}, VectorIndex(0)),
                        {},
                        false};
  std::unique_ptr<QuestionIndex> question_index_;
  std::vector<DemoExample> fixed_demos_;
  std::unique_ptr<TripleStore> store_;
  std::unique_ptr<ExecutionBackend> backend_;
  std::unique_ptr<LlmProvider> llm_;
};

}  // namespace kbqa
