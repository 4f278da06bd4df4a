#include "kbqa/config.hpp"

#include <charconv>
#include <fstream>

#include <nlohmann/json.hpp>

#include "kbqa/errors.hpp"

namespace kbqa {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ParseError("bad numeric value for '" + key + "': " + value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParseError("bad boolean value for '" + key + "': " + value);
}

}  // namespace

void apply_config_value(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "entities") cfg.entities_path = value;
  else if (key == "popularity") cfg.popularity_path = value;
  else if (key == "relations") cfg.relations_path = value;
  else if (key == "triples") cfg.triples_path = value;
  else if (key == "train_pool") cfg.train_pool_path = value;
  else if (key == "llm_fixture") cfg.llm_fixture_path = value;
  else if (key == "cache_dir") cfg.cache_dir = value;
  else if (key == "endpoint_url") cfg.endpoint_url = value;
  else if (key == "me") cfg.m_e = parse_number<std::size_t>(key, value);
  else if (key == "mr") cfg.m_r = parse_number<std::size_t>(key, value);
  else if (key == "k_shots") cfg.k_shots = parse_number<std::size_t>(key, value);
  else if (key == "num_hints") cfg.num_hints = parse_number<std::size_t>(key, value);
  else if (key == "probe_budget") cfg.probe_budget = parse_number<std::uint64_t>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "model") cfg.sampling.model_name = value;
  else if (key == "temperature") {
    try {
      cfg.sampling.temperature = std::stod(value);
    } catch (...) {
      throw ParseError("bad numeric value for 'temperature': " + value);
    }
  } else if (key == "max_tokens") cfg.sampling.max_tokens = parse_number<std::size_t>(key, value);
  else if (key == "samples") cfg.sampling.num_samples = parse_number<std::size_t>(key, value);
  else if (key == "demo_mode") {
    if (value == "fixed") cfg.demo_mode = DemoMode::FixedRandom;
    else if (value == "similar") cfg.demo_mode = DemoMode::Similar;
    else throw ParseError("demo_mode must be 'fixed' or 'similar'");
  } else if (key == "backend") {
    if (value == "memory") cfg.backend = BackendKind::InMemory;
    else if (value == "endpoint") cfg.backend = BackendKind::SparqlEndpoint;
    else throw ParseError("backend must be 'memory' or 'endpoint'");
  } else if (key == "provider") {
    if (value == "http") cfg.provider = ProviderKind::Http;
    else if (value == "mock") cfg.provider = ProviderKind::Mock;
    else throw ParseError("provider must be 'http' or 'mock'");
  } else if (key == "http_base_url") cfg.http.base_url = value;
  else if (key == "http_path") cfg.http.path = value;
  else if (key == "api_key_env") cfg.http.api_key_env = value;
  else if (key == "http_timeout_sec") cfg.http.timeout_sec = parse_number<int>(key, value);
  else if (key == "http_max_retries") cfg.http.max_retries = parse_number<int>(key, value);
  else if (key == "endpoint_timeout_sec") cfg.endpoint_timeout_sec = parse_number<int>(key, value);
  else if (key == "concurrency") cfg.concurrency = parse_number<std::size_t>(key, value);
  else if (key == "embed_dim") cfg.embed_dim = parse_number<std::size_t>(key, value);
  else if (key == "embed_seed") cfg.embed_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "count_zero_is_empty") cfg.count_zero_is_empty = parse_bool(key, value);
  else if (key == "ablate_instruction") cfg.ablate_instruction = parse_bool(key, value);
  else if (key == "ablate_relations") cfg.ablate_relations = parse_bool(key, value);
  else if (key == "ablate_examples") cfg.ablate_examples = parse_bool(key, value);
  else if (key == "oracle_selection") cfg.oracle_selection = parse_bool(key, value);
  else if (key == "echo_prompt") cfg.echo_prompt = parse_bool(key, value);
  else throw ParseError("unknown config key '" + key + "'");
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file", path.string(), 0);
  PipelineConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", path.string(), line_no);
    try {
      apply_config_value(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), path.string(), line_no);
    }
  }
  return cfg;
}

std::string config_echo_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["entities"] = cfg.entities_path;
  doc["popularity"] = cfg.popularity_path;
  doc["relations"] = cfg.relations_path;
  doc["triples"] = cfg.triples_path;
  doc["train_pool"] = cfg.train_pool_path;
  doc["llm_fixture"] = cfg.llm_fixture_path;
  doc["cache_dir"] = cfg.cache_dir;
  doc["endpoint_url"] = cfg.endpoint_url;
  doc["me"] = cfg.m_e;
  doc["mr"] = cfg.m_r;
  doc["k_shots"] = cfg.k_shots;
  doc["num_hints"] = cfg.num_hints;
  doc["probe_budget"] = cfg.probe_budget;
  doc["seed"] = cfg.seed;
  doc["model"] = cfg.sampling.model_name;
  doc["temperature"] = cfg.sampling.temperature;
  doc["max_tokens"] = cfg.sampling.max_tokens;
  doc["samples"] = cfg.sampling.num_samples;
  doc["demo_mode"] = cfg.demo_mode == DemoMode::FixedRandom ? "fixed" : "similar";
  doc["backend"] = cfg.backend == BackendKind::InMemory ? "memory" : "endpoint";
  doc["provider"] = cfg.provider == ProviderKind::Http ? "http" : "mock";
  doc["endpoint_timeout_sec"] = cfg.endpoint_timeout_sec;
  doc["concurrency"] = cfg.concurrency;
  doc["embed_dim"] = cfg.embed_dim;
  doc["embed_seed"] = cfg.embed_seed;
  doc["count_zero_is_empty"] = cfg.count_zero_is_empty;
  doc["ablate_instruction"] = cfg.ablate_instruction;
  doc["ablate_relations"] = cfg.ablate_relations;
  doc["ablate_examples"] = cfg.ablate_examples;
  doc["oracle_selection"] = cfg.oracle_selection;
  doc["echo_prompt"] = cfg.echo_prompt;
  return doc.dump(2) + "\n";
}

}  // namespace kbqa
