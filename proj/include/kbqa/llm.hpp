#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbqa {

struct ProviderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FixtureMiss : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SamplingConfig {
  std::string model_name = "gpt-3.5-turbo";
  double temperature = 0.7;
  std::size_t max_tokens = 300;
  std::size_t num_samples = 1;
};

struct GenerationBatch {
  std::string prompt;
  std::vector<std::string> completions;  // index = sample id
  std::map<std::string, std::string> provider_metadata;
};

/// Transport-only completion interface: providers never look inside the
/// completions. Implementations must allow concurrent generate calls.
class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual GenerationBatch generate(const std::string& prompt,
                                   const SamplingConfig& cfg) = 0;
};

struct HttpProviderConfig {
  std::string base_url;                       // e.g. https://api.openai.com
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "KBQA_API_KEY";
  int timeout_sec = 30;
  int max_retries = 3;
  double backoff_base_sec = 0.5;
};

/// Chat-completions client. The prompt is sent verbatim as a single user
/// message; transient failures (connect errors, 429, 5xx) are retried with
/// exponential backoff.
class HttpChatProvider final : public LlmProvider {
 public:
  explicit HttpChatProvider(HttpProviderConfig cfg);
  GenerationBatch generate(const std::string& prompt,
                           const SamplingConfig& cfg) override;

 private:
  HttpProviderConfig cfg_;
};

/// Deterministic replay provider backed by a line-delimited JSON fixture of
/// {"question", "completions"} records, keyed by the query question of the
/// prompt. When more samples are requested than recorded, completions cycle.
class MockProvider final : public LlmProvider {
 public:
  explicit MockProvider(std::filesystem::path fixture_file,
                        bool record_mode = false);

  GenerationBatch generate(const std::string& prompt,
                           const SamplingConfig& cfg) override;

  /// Persists completions for a question; the last record for a question
  /// wins on reload.
  void record_fixture(const std::string& question,
                      std::vector<std::string> completions);

  /// The trailing `question = '...'` line of a prompt.
  static std::string extract_query_question(const std::string& prompt);

  std::size_t size() const { return fixtures_.size(); }

 private:
  std::filesystem::path path_;
  bool record_mode_;
  std::map<std::string, std::vector<std::string>> fixtures_;
  std::mutex mutex_;
};

}  // namespace kbqa
