#include "kbqa/grounding.hpp"

#include <algorithm>

namespace kbqa {

std::uint64_t product_size(const std::vector<CandidateSlot>& slots) {
  std::uint64_t size = 1;
  for (const CandidateSlot& slot : slots) {
    std::uint64_t n = slot.candidates.size();
    if (n == 0) return 0;
    if (size > UINT64_MAX / n) return UINT64_MAX;
    size *= n;
  }
  return size;
}

namespace {

bool non_empty_hit(const Denotation& d, const GroundingOptions& opts) {
  if (d.is_count())
    return opts.count_zero_is_empty ? *d.count > 0 : true;
  return !d.items.empty();
}

}  // namespace

EnumerationResult enumerate_and_execute(const SExpr& expr,
                                        const std::vector<CandidateSlot>& slots,
                                        const ExecutionBackend& backend,
                                        const GroundingOptions& opts) {
  EnumerationResult result;
  if (product_size(slots) == 0) return result;  // some slot has no candidates

  Mentions mentions = collect_mentions(expr);
  std::size_t entity_slots = 0, relation_slots = 0;
  for (const CandidateSlot& slot : slots)
    (slot.kind == SlotKind::Entity ? entity_slots : relation_slots)++;
  if (entity_slots != mentions.entities.size() ||
      relation_slots != mentions.relations.size())
    throw std::invalid_argument("slots do not match the expression's mentions");

  std::vector<std::size_t> ranks(slots.size(), 0);
  while (true) {
    if (result.probes >= opts.probe_budget) {
      result.budget_exhausted = true;
      return result;
    }
    ++result.probes;

    std::vector<std::string> entities;
    std::vector<RelRef> relations;
    std::vector<Candidate> tuple;
    tuple.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const Candidate& c = slots[i].candidates[ranks[i]];
      tuple.push_back(c);
      if (slots[i].kind == SlotKind::Entity)
        entities.push_back(c.id);
      else
        relations.push_back({c.id, c.orientation.value_or(Orientation::Forward)});
    }

    SExprPtr grounded = substitute_mentions(expr, entities, relations);
    try {
      Denotation d = backend.execute(*grounded);
      if (non_empty_hit(d, opts)) {
        result.answer = d.as_answer_set();
        result.grounded_expr = print_sexpr(grounded);
        result.assignment = GroundingAssignment{std::move(tuple), ranks};
        return result;
      }
    } catch (const EvalError&) {
      // tuple not executable; spend the probe and keep going
    } catch (const EndpointError&) {
    } catch (const CompileError&) {
    }

    // Odometer step, rightmost slot fastest.
    std::size_t i = slots.size();
    while (i > 0) {
      --i;
      if (++ranks[i] < slots[i].candidates.size()) break;
      ranks[i] = 0;
      if (i == 0) return result;  // product exhausted
    }
    if (slots.empty()) return result;  // no mentions: single probe done above
  }
}

std::optional<AnswerSet> majority_vote(
    const std::vector<std::optional<AnswerSet>>& per_sample_answers) {
  std::optional<AnswerSet> winner;
  std::size_t winner_count = 0;
  for (std::size_t i = 0; i < per_sample_answers.size(); ++i) {
    const auto& candidate = per_sample_answers[i];
    if (!candidate) continue;
    std::size_t count = 0;
    for (const auto& other : per_sample_answers)
      if (other && *other == *candidate) ++count;
    if (count > winner_count) {  // first occurrence wins ties
      winner = candidate;
      winner_count = count;
    }
  }
  return winner;
}

namespace {

double f1_against(const AnswerSet& pred, const AnswerSet& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (const std::string& p : pred)
    if (gold.count(p)) ++hits;
  return 2.0 * static_cast<double>(hits) /
         static_cast<double>(pred.size() + gold.size());
}

}  // namespace

AnswerRecord answer_question(const std::string& qid, const std::string& question,
                             const PipelineContext& ctx,
                             const QuestionConfig& cfg,
                             const AnswerSet* gold_for_oracle) {
  AnswerRecord record;
  record.qid = qid;
  record.question = question;

  PromptBundle bundle;
  if (!cfg.ablate_instruction) bundle.instruction = instruction_text();
  if (!cfg.ablate_examples && cfg.k_shots > 0) {
    if (cfg.fixed_demos && cfg.demo_mode == DemoMode::FixedRandom) {
      bundle.demos = *cfg.fixed_demos;
    } else if (ctx.train_pool) {
      NameMapper mapper;
      if (ctx.catalog) {
        const EntityCatalog* catalog = ctx.catalog;
        mapper = [catalog](const std::string& id) { return catalog->name_of(id); };
      }
      bundle.demos =
          build_demos(*ctx.train_pool, cfg.k_shots, cfg.demo_mode, cfg.seed,
                      question, ctx.question_index, ctx.embedder, mapper);
    }
  }
  if (!cfg.ablate_relations && cfg.num_hints > 0 && ctx.relations)
    bundle.relation_hints =
        build_relation_hints(question, *ctx.relations, *ctx.embedder, cfg.num_hints);
  bundle.query_question = question;

  std::string prompt = render_prompt(bundle);
  if (cfg.echo_prompt) record.prompt = prompt;

  GenerationBatch batch = ctx.llm->generate(prompt, cfg.sampling);

  std::vector<std::optional<AnswerSet>> per_sample;
  per_sample.reserve(batch.completions.size());
  for (const std::string& raw : batch.completions) {
    SampleOutcome outcome;
    outcome.raw_text = raw;
    try {
      CallSequence seq = parse_callseq(raw);
      SExprPtr expr = interpret(seq);
      outcome.callseq_text = render_callseq(seq);

      Mentions mentions = collect_mentions(*expr);
      std::vector<CandidateSlot> slots;
      slots.reserve(mentions.entities.size() + mentions.relations.size());
      for (const MentionRef& m : mentions.entities)
        slots.push_back(link_entity(m.text, *ctx.catalog, *ctx.embedder, cfg.m_e));
      for (const MentionRef& m : mentions.relations)
        slots.push_back(match_relation(m.text, *ctx.relations, *ctx.embedder, cfg.m_r));

      EnumerationResult enumerated =
          enumerate_and_execute(*expr, slots, *ctx.backend, cfg.grounding);
      outcome.probes = enumerated.probes;
      record.probes_used += enumerated.probes;
      if (enumerated.answer) {
        outcome.verdict = "answered";
        outcome.answer = enumerated.answer;
        outcome.grounded_expr = enumerated.grounded_expr;
      } else {
        outcome.verdict = "empty";
      }
    } catch (const FormatError& e) {
      outcome.verdict = "format_error";
      outcome.format_reason = e.reason;
    } catch (const EmptyCatalog&) {
      outcome.verdict = "grounding_error";
    } catch (const EmptyIndex&) {
      outcome.verdict = "grounding_error";
    }
    per_sample.push_back(outcome.answer);
    record.samples.push_back(std::move(outcome));
  }

  if (cfg.oracle_selection && gold_for_oracle) {
    double best = -1.0;
    for (std::size_t i = 0; i < per_sample.size(); ++i) {
      if (!per_sample[i]) continue;
      double f1 = f1_against(*per_sample[i], *gold_for_oracle);
      if (f1 > best) {
        best = f1;
        record.final_answer = per_sample[i];
        record.final_expr = record.samples[i].grounded_expr;
      }
    }
  } else {
    record.final_answer = majority_vote(per_sample);
    if (record.final_answer) {
      for (const SampleOutcome& s : record.samples) {
        if (s.answer && *s.answer == *record.final_answer) {
          record.final_expr = s.grounded_expr;
          break;
        }
      }
    }
  }
  return record;
}

}  // namespace kbqa
