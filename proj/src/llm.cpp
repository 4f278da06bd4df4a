#include "kbqa/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace kbqa {

using nlohmann::json;

namespace {

void check_sampling(const SamplingConfig& cfg) {
  if (cfg.num_samples < 1)
    throw std::invalid_argument("num_samples must be at least 1");
  if (cfg.temperature < 0)
    throw std::invalid_argument("temperature must be non-negative");
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

HttpChatProvider::HttpChatProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.base_url.empty())
    throw ProviderError("http provider requires a base URL");
}

GenerationBatch HttpChatProvider::generate(const std::string& prompt,
                                           const SamplingConfig& cfg) {
  check_sampling(cfg);

  json body = {
      {"model", cfg.model_name},
      {"temperature", cfg.temperature},
      {"max_tokens", cfg.max_tokens},
      {"n", cfg.num_samples},
      {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
  };
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay = std::chrono::duration<double>(cfg_.backoff_base_sec *
                                                 (1 << (attempt - 1)));
      std::this_thread::sleep_for(
          std::chrono::duration_cast<std::chrono::milliseconds>(delay));
    }
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(cfg_.timeout_sec, 0);
    client.set_read_timeout(cfg_.timeout_sec, 0);
    client.set_write_timeout(cfg_.timeout_sec, 0);

    auto res = client.Post(cfg_.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      if (retryable_status(res->status)) continue;
      throw ProviderError(last_error + ": " + res->body.substr(0, 200));
    }

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") ||
        !reply["choices"].is_array())
      throw ProviderError("malformed completion response");

    GenerationBatch batch;
    batch.prompt = prompt;
    for (const auto& choice : reply["choices"]) {
      if (choice.contains("message") && choice["message"].contains("content"))
        batch.completions.push_back(choice["message"]["content"].get<std::string>());
      else if (choice.contains("text"))
        batch.completions.push_back(choice["text"].get<std::string>());
      else
        throw ProviderError("completion choice without content");
    }
    if (batch.completions.size() != cfg.num_samples)
      throw ProviderError("expected " + std::to_string(cfg.num_samples) +
                          " completions, got " +
                          std::to_string(batch.completions.size()));
    batch.provider_metadata["provider"] = "http";
    batch.provider_metadata["model"] = cfg.model_name;
    return batch;
  }
  throw ProviderError("request failed after retries: " + last_error);
}

MockProvider::MockProvider(std::filesystem::path fixture_file, bool record_mode)
    : path_(std::move(fixture_file)), record_mode_(record_mode) {
  std::ifstream in(path_);
  if (!in) {
    if (!record_mode_)
      throw IoError("cannot open fixture file " + path_.string());
    return;  // record mode may start from an empty fixture
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.contains("question") ||
        !row.contains("completions"))
      throw IoError(path_.string() + ":" + std::to_string(line_no) +
                    ": expected {\"question\", \"completions\"}");
    fixtures_[row["question"].get<std::string>()] =
        row["completions"].get<std::vector<std::string>>();
  }
}

std::string MockProvider::extract_query_question(const std::string& prompt) {
  // The query question is the last question assignment in the prompt.
  std::size_t pos = 0;
  std::string found;
  while (pos <= prompt.size()) {
    std::size_t eol = prompt.find('\n', pos);
    std::string line =
        prompt.substr(pos, eol == std::string::npos ? eol : eol - pos);
    pos = eol == std::string::npos ? prompt.size() + 1 : eol + 1;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string lhs = line.substr(0, eq);
    while (!lhs.empty() && (lhs.back() == ' ' || lhs.back() == '\t'))
      lhs.pop_back();
    while (!lhs.empty() && (lhs.front() == ' ' || lhs.front() == '\t'))
      lhs.erase(lhs.begin());
    if (lhs != "question") continue;
    std::string rhs = line.substr(eq + 1);
    std::size_t open = rhs.find_first_of("'\"");
    if (open == std::string::npos) continue;
    char quote = rhs[open];
    std::size_t close = rhs.rfind(quote);
    if (close <= open) continue;
    found = rhs.substr(open + 1, close - open - 1);
  }
  return found;
}

GenerationBatch MockProvider::generate(const std::string& prompt,
                                       const SamplingConfig& cfg) {
  check_sampling(cfg);
  std::string question = extract_query_question(prompt);

  std::vector<std::string> canned;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = fixtures_.find(question);
    if (it == fixtures_.end() || it->second.empty())
      throw FixtureMiss("no fixture for question '" + question + "'");
    canned = it->second;
  }

  GenerationBatch batch;
  batch.prompt = prompt;
  batch.completions.reserve(cfg.num_samples);
  for (std::size_t i = 0; i < cfg.num_samples; ++i)
    batch.completions.push_back(canned[i % canned.size()]);
  batch.provider_metadata["provider"] = "mock";
  return batch;
}

void MockProvider::record_fixture(const std::string& question,
                                  std::vector<std::string> completions) {
  if (!record_mode_)
    throw ProviderError("record_fixture requires record mode");
  std::lock_guard<std::mutex> lock(mutex_);
  json row = {{"question", question}, {"completions", completions}};
  std::ofstream out(path_, std::ios::app);
  if (!out || !(out << row.dump() << '\n'))
    throw IoError("cannot append to fixture file " + path_.string());
  fixtures_[question] = std::move(completions);
}

}  // namespace kbqa
