#include "kbqa/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace kbqa {

Pipeline Pipeline::from_config(const PipelineConfig& cfg) {
  Pipeline p;
  p.cfg_ = cfg;
  p.embedder_ =
      std::make_unique<HashedNgramEmbedder>(cfg.embed_dim, cfg.embed_seed);

  IndexSources sources;
  sources.entities = cfg.entities_path;
  sources.popularity = cfg.popularity_path;
  sources.relations = cfg.relations_path;
  sources.train_pool = cfg.train_pool_path;
  p.indexes_ = build_or_load_indexes(sources, cfg.cache_dir, *p.embedder_);

  if (!p.indexes_.train_pool.empty())
    p.question_index_ =
        std::make_unique<QuestionIndex>(p.indexes_.train_pool, *p.embedder_);

  if (!cfg.ablate_examples && cfg.k_shots > 0 &&
      cfg.demo_mode == DemoMode::FixedRandom && !p.indexes_.train_pool.empty()) {
    const EntityCatalog* catalog = &p.indexes_.catalog;
    p.fixed_demos_ = build_demos(
        p.indexes_.train_pool, cfg.k_shots, DemoMode::FixedRandom, cfg.seed, "",
        nullptr, nullptr,
        [catalog](const std::string& id) { return catalog->name_of(id); });
  }

  // Backend and provider stay unset when unconfigured; prompt inspection
  // and index building need neither.
  if (cfg.backend == BackendKind::InMemory) {
    if (!cfg.triples_path.empty()) {
      p.store_ = std::make_unique<TripleStore>(TripleStore::load(cfg.triples_path));
      p.backend_ = std::make_unique<InMemoryBackend>(*p.store_);
    }
  } else if (!cfg.endpoint_url.empty()) {
    p.backend_ = std::make_unique<EndpointBackend>(
        SparqlEndpointConfig{cfg.endpoint_url, cfg.endpoint_timeout_sec});
  }

  if (cfg.provider == ProviderKind::Mock) {
    if (!cfg.llm_fixture_path.empty())
      p.llm_ = std::make_unique<MockProvider>(cfg.llm_fixture_path);
  } else {
    p.llm_ = std::make_unique<HttpChatProvider>(cfg.http);
  }
  return p;
}

QuestionConfig Pipeline::question_config() const {
  QuestionConfig qc;
  qc.k_shots = cfg_.k_shots;
  qc.demo_mode = cfg_.demo_mode;
  qc.seed = cfg_.seed;
  qc.num_hints = cfg_.num_hints;
  qc.m_e = cfg_.m_e;
  qc.m_r = cfg_.m_r;
  qc.sampling = cfg_.sampling;
  qc.grounding.probe_budget = cfg_.probe_budget;
  qc.grounding.count_zero_is_empty = cfg_.count_zero_is_empty;
  qc.ablate_instruction = cfg_.ablate_instruction;
  qc.ablate_relations = cfg_.ablate_relations;
  qc.ablate_examples = cfg_.ablate_examples;
  qc.echo_prompt = cfg_.echo_prompt;
  qc.oracle_selection = cfg_.oracle_selection;
  if (!fixed_demos_.empty()) qc.fixed_demos = &fixed_demos_;
  return qc;
}

PipelineContext Pipeline::context() const {
  PipelineContext ctx;
  ctx.catalog = &indexes_.catalog;
  ctx.relations = &indexes_.relations;
  ctx.train_pool = &indexes_.train_pool;
  ctx.question_index = question_index_.get();
  ctx.embedder = embedder_.get();
  ctx.llm = llm_.get();
  ctx.backend = backend_.get();
  return ctx;
}

AnswerRecord Pipeline::answer(const std::string& qid, const std::string& question,
                              const AnswerSet* gold_for_oracle) const {
  if (!llm_)
    throw ProviderError("no completion provider configured (llm_fixture "
                        "or http settings required)");
  if (!backend_)
    throw ParseError("no execution backend configured (triples or "
                     "endpoint_url required)");
  return answer_question(qid, question, context(), question_config(),
                         gold_for_oracle);
}

std::string Pipeline::prompt_for(const std::string& question) const {
  QuestionConfig qc = question_config();
  PipelineContext ctx = context();

  PromptBundle bundle;
  if (!qc.ablate_instruction) bundle.instruction = instruction_text();
  if (!qc.ablate_examples && qc.k_shots > 0) {
    if (qc.fixed_demos && qc.demo_mode == DemoMode::FixedRandom) {
      bundle.demos = *qc.fixed_demos;
    } else if (ctx.train_pool && !ctx.train_pool->empty()) {
      const EntityCatalog* catalog = ctx.catalog;
      bundle.demos = build_demos(
          *ctx.train_pool, qc.k_shots, qc.demo_mode, qc.seed, question,
          ctx.question_index, ctx.embedder,
          [catalog](const std::string& id) { return catalog->name_of(id); });
    }
  }
  if (!qc.ablate_relations && qc.num_hints > 0)
    bundle.relation_hints = build_relation_hints(question, *ctx.relations,
                                                 *ctx.embedder, qc.num_hints);
  bundle.query_question = question;
  return render_prompt(bundle);
}

std::vector<AnswerRecord> Pipeline::run(
    const std::vector<EvalRecord>& dataset) const {
  std::vector<AnswerRecord> records(dataset.size());
  std::atomic<std::size_t> next{0};
  std::size_t workers = std::max<std::size_t>(1, cfg_.concurrency);
  workers = std::min(workers, dataset.size() == 0 ? 1 : dataset.size());

  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= dataset.size()) return;
      try {
        const AnswerSet* gold =
            cfg_.oracle_selection ? &dataset[i].gold_answers : nullptr;
        records[i] = answer(dataset[i].qid, dataset[i].question, gold);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return records;
}

}  // namespace kbqa
