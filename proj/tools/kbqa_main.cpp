// kbqa — knowledge-base question answering over LLM-generated function-call
// programs. Subcommands: index, convert, prompt, run, eval.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kbqa/cache.hpp"
#include "kbqa/config.hpp"
#include "kbqa/eval.hpp"
#include "kbqa/pipeline.hpp"

namespace {

using namespace kbqa;

struct CommonOpts {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_config_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "configuration file");
  auto track = [&opts](const std::string& key) {
    return [&opts, key](const std::string& value) {
      opts.overrides.push_back({key, value});
    };
  };
  cmd->add_option_function<std::string>("--entities", track("entities"));
  cmd->add_option_function<std::string>("--popularity", track("popularity"));
  cmd->add_option_function<std::string>("--relations", track("relations"));
  cmd->add_option_function<std::string>("--triples", track("triples"));
  cmd->add_option_function<std::string>("--train-pool", track("train_pool"));
  cmd->add_option_function<std::string>("--llm-fixture", track("llm_fixture"));
  cmd->add_option_function<std::string>("--cache-dir", track("cache_dir"));
  cmd->add_option_function<std::string>("--endpoint-url", track("endpoint_url"));
  cmd->add_option_function<std::string>("--k-shots", track("k_shots"));
  cmd->add_option_function<std::string>("--num-hints", track("num_hints"));
  cmd->add_option_function<std::string>("--me", track("me"));
  cmd->add_option_function<std::string>("--mr", track("mr"));
  cmd->add_option_function<std::string>("--samples", track("samples"));
  cmd->add_option_function<std::string>("--seed", track("seed"));
  cmd->add_option_function<std::string>("--probe-budget", track("probe_budget"));
  cmd->add_option_function<std::string>("--model", track("model"));
  cmd->add_option_function<std::string>("--temperature", track("temperature"));
  cmd->add_option_function<std::string>("--max-tokens", track("max_tokens"));
  cmd->add_option_function<std::string>("--concurrency", track("concurrency"));
  cmd->add_option_function<std::string>("--http-base-url", track("http_base_url"));
  cmd
      ->add_option_function<std::string>("--demo-mode", track("demo_mode"),
                                         "fixed|similar")
      ->check(CLI::IsMember({"fixed", "similar"}));
  cmd
      ->add_option_function<std::string>("--backend", track("backend"),
                                         "memory|endpoint")
      ->check(CLI::IsMember({"memory", "endpoint"}));
  cmd
      ->add_option_function<std::string>("--provider", track("provider"),
                                         "http|mock")
      ->check(CLI::IsMember({"http", "mock"}));
  cmd->add_option_function<std::vector<std::string>>(
         "--ablate",
         [&opts](const std::vector<std::string>& parts) {
           for (const std::string& part : parts)
             opts.overrides.push_back({"ablate_" + part, "true"});
         },
         "relations|instruction|examples (repeatable)")
      ->check(CLI::IsMember({"relations", "instruction", "examples"}));
  cmd->add_flag_function(
      "--oracle-selection",
      [&opts](std::int64_t) {
        opts.overrides.push_back({"oracle_selection", "true"});
      },
      "pick the best-scoring sample against gold answers");
  cmd->add_flag_function(
      "--echo-prompt",
      [&opts](std::int64_t) { opts.overrides.push_back({"echo_prompt", "true"}); },
      "store the rendered prompt in each answer record");
}

PipelineConfig resolve_config(const CommonOpts& opts) {
  PipelineConfig cfg;
  if (!opts.config_path.empty()) cfg = load_config_file(opts.config_path);
  for (const auto& [key, value] : opts.overrides)
    apply_config_value(cfg, key, value);
  return cfg;
}

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open input file", path, 0);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_index(const CommonOpts& opts) {
  PipelineConfig cfg = resolve_config(opts);
  if (cfg.cache_dir.empty())
    throw ParseError("index requires cache_dir (or --cache-dir)");
  HashedNgramEmbedder embed(cfg.embed_dim, cfg.embed_seed);
  IndexSources sources;
  sources.entities = cfg.entities_path;
  sources.popularity = cfg.popularity_path;
  sources.relations = cfg.relations_path;
  sources.train_pool = cfg.train_pool_path;
  BuiltIndexes built = build_or_load_indexes(sources, cfg.cache_dir, embed);
  std::cout << (built.rebuilt ? "built" : "up-to-date") << ": "
            << built.catalog.size() << " entities, " << built.relations.size()
            << " relations, " << built.train_pool.size()
            << " training pairs cached in " << cfg.cache_dir << "\n";
  return 0;
}

int cmd_convert(bool to_callseq, bool to_sexpr, const std::string& input_path) {
  std::string input = read_input(input_path);
  if (to_callseq == to_sexpr)
    throw ParseError("choose exactly one of --to-callseq/--to-sexpr");
  if (to_callseq) {
    // one expression per line in; blank-line separated programs out
    std::istringstream lines(input);
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      SExprPtr expr = parse_sexpr(line);
      if (!first) std::cout << "\n";
      std::cout << render_callseq(compile_to_callseq(*expr, std::nullopt));
      first = false;
    }
    return 0;
  }
  // blank-line separated programs in; one expression per line out
  std::istringstream blocks(input);
  std::string block, line;
  auto flush = [&block]() {
    if (block.find_first_not_of(" \t\r\n") == std::string::npos) {
      block.clear();
      return;
    }
    std::cout << print_sexpr(interpret(parse_callseq(block))) << "\n";
    block.clear();
  };
  while (std::getline(blocks, line)) {
    if (line.empty()) {
      flush();
    } else {
      block += line;
      block += '\n';
    }
  }
  flush();
  return 0;
}

int cmd_prompt(const CommonOpts& opts, const std::string& question) {
  PipelineConfig cfg = resolve_config(opts);
  Pipeline pipeline = Pipeline::from_config(cfg);
  std::cout << pipeline.prompt_for(question);
  return 0;
}

int cmd_run(const CommonOpts& opts, const std::string& dataset_path,
            const std::string& format_name, const std::string& out_path,
            const std::string& dump_prompt_dir) {
  PipelineConfig cfg = resolve_config(opts);
  auto format = dataset_format_from_string(format_name);
  if (!format) throw ParseError("unknown dataset format '" + format_name + "'");
  if (cfg.k_shots == 0 && cfg.ablate_examples)
    throw ParseError(
        "--k-shots 0 already removes demos; --ablate examples is redundant");

  std::vector<EvalRecord> dataset = load_dataset(dataset_path, *format);
  Pipeline pipeline = Pipeline::from_config(cfg);

  if (!dump_prompt_dir.empty()) {
    std::filesystem::create_directories(dump_prompt_dir);
    for (const EvalRecord& rec : dataset) {
      std::ofstream out(std::filesystem::path(dump_prompt_dir) /
                        (rec.qid + ".prompt.txt"));
      out << pipeline.prompt_for(rec.question);
    }
  }

  std::vector<AnswerRecord> records = pipeline.run(dataset);
  write_answer_records(out_path, records);
  {
    std::ofstream echo(out_path + ".config.json");
    echo << config_echo_json(cfg);
  }
  std::cout << "answered " << records.size() << " questions -> " << out_path
            << "\n";
  return 0;
}

int cmd_eval(const std::vector<std::string>& record_paths,
             const std::string& dataset_path, const std::string& format_name,
             const std::string& report_path) {
  auto format = dataset_format_from_string(format_name);
  if (!format) throw ParseError("unknown dataset format '" + format_name + "'");
  std::vector<EvalRecord> dataset = load_dataset(dataset_path, *format);

  std::vector<MetricsReport> runs;
  for (const std::string& path : record_paths)
    runs.push_back(compute_metrics(read_answer_records(path), dataset));
  MetricsReport report = aggregate_runs(runs);

  std::cout << render_report_text(report);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << report_to_json(report);
    std::cout << "report -> " << report_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-base question answering pipeline"};
  app.require_subcommand(1);

  CommonOpts index_opts;
  CLI::App* index = app.add_subcommand("index", "build and cache the indexes");
  add_config_options(index, index_opts);

  bool to_callseq = false, to_sexpr = false;
  std::string convert_input;
  CLI::App* convert =
      app.add_subcommand("convert", "convert between expressions and programs");
  convert->add_flag("--to-callseq", to_callseq, "expressions -> programs");
  convert->add_flag("--to-sexpr", to_sexpr, "programs -> expressions");
  convert->add_option("input", convert_input, "input file (default stdin)");

  CommonOpts prompt_opts;
  std::string prompt_question;
  CLI::App* prompt =
      app.add_subcommand("prompt", "print the prompt for a question");
  add_config_options(prompt, prompt_opts);
  prompt->add_option("--question", prompt_question, "question text")->required();

  CommonOpts run_opts;
  std::string run_dataset, run_format = "fixture", run_out = "records.jsonl";
  std::string dump_prompt_dir;
  CLI::App* run = app.add_subcommand("run", "answer a dataset");
  add_config_options(run, run_opts);
  run->add_option("--dataset", run_dataset, "dataset file")->required();
  run->add_option("--format", run_format, "grailqa|webqsp|graphq|fixture");
  run->add_option("--out", run_out, "answer records output path");
  run->add_option("--dump-prompts", dump_prompt_dir,
                  "write each question's prompt into this directory");

  std::vector<std::string> eval_records;
  std::string eval_dataset, eval_format = "fixture", eval_report;
  CLI::App* evalc = app.add_subcommand("eval", "score answer records");
  evalc->add_option("--records", eval_records, "answer record files (repeatable)")
      ->required();
  evalc->add_option("--dataset", eval_dataset, "dataset file")->required();
  evalc->add_option("--format", eval_format, "grailqa|webqsp|graphq|fixture");
  evalc->add_option("--report", eval_report, "JSON report output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*index) return cmd_index(index_opts);
    if (*convert) return cmd_convert(to_callseq, to_sexpr, convert_input);
    if (*prompt) return cmd_prompt(prompt_opts, prompt_question);
    if (*run)
      return cmd_run(run_opts, run_dataset, run_format, run_out, dump_prompt_dir);
    if (*evalc)
      return cmd_eval(eval_records, eval_dataset, eval_format, eval_report);
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TypeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << to_string(e.reason) << ": " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
