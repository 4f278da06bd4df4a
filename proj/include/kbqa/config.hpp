#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "kbqa/grounding.hpp"
#include "kbqa/llm.hpp"

namespace kbqa {

enum class BackendKind { InMemory, SparqlEndpoint };
enum class ProviderKind { Http, Mock };

/// Fully resolved run configuration. File values are plain `key = value`
/// lines (see README); command-line flags override file values.
struct PipelineConfig {
  // data paths
  std::string entities_path;
  std::string popularity_path;
  std::string relations_path;
  std::string triples_path;
  std::string train_pool_path;
  std::string llm_fixture_path;
  std::string cache_dir;
  std::string endpoint_url;

  // retrieval and sampling knobs
  std::size_t m_e = 15;
  std::size_t m_r = 100;
  std::size_t k_shots = 40;
  std::size_t num_hints = 1;
  std::uint64_t probe_budget = 2000;
  std::uint64_t seed = 1;
  SamplingConfig sampling;
  DemoMode demo_mode = DemoMode::FixedRandom;

  // operational knobs
  BackendKind backend = BackendKind::InMemory;
  ProviderKind provider = ProviderKind::Mock;
  HttpProviderConfig http;
  int endpoint_timeout_sec = 10;
  std::size_t concurrency = 4;
  std::size_t embed_dim = 256;
  std::uint64_t embed_seed = 0x6b627161;
  bool count_zero_is_empty = true;

  bool ablate_instruction = false;
  bool ablate_relations = false;
  bool ablate_examples = false;
  bool oracle_selection = false;
  bool echo_prompt = false;
};

PipelineConfig load_config_file(const std::filesystem::path& path);

/// Applies one `key = value` override; unknown keys throw ParseError.
void apply_config_value(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

/// The resolved configuration, serialized for the run's config echo file.
std::string config_echo_json(const PipelineConfig& cfg);

}  // namespace kbqa
