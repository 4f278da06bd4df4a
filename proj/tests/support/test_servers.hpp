#pragma once

// In-process HTTP servers for exercising the real network clients against
// loopback: a SPARQL endpoint backed by the minisparql engine and a
// chat-completions stand-in with scriptable behavior.

#include <atomic>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "minisparql.hpp"

namespace testsupport {

class HttpTestServer {
 public:
  explicit HttpTestServer(
      std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post(".*", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("cannot bind loopback test server");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~HttpTestServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }
  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

/// SPARQL endpoint evaluating queries with the test-side engine.
inline std::unique_ptr<HttpTestServer> make_sparql_endpoint(
    const kbqa::TripleStore& store) {
  return std::make_unique<HttpTestServer>(
      [&store](const httplib::Request& req, httplib::Response& res) {
        std::string query = req.get_param_value("query");
        try {
          minisparql::Result result = minisparql::run_query(query, store);
          res.set_content(minisparql::results_to_json(result, "x0"),
                          "application/sparql-results+json");
        } catch (const std::exception& e) {
          res.status = 400;
          res.set_content(e.what(), "text/plain");
        }
      });
}

/// Chat-completions server returning `reply(prompt, n)` completions, with an
/// optional number of leading failures to exercise retry handling.
inline std::unique_ptr<HttpTestServer> make_chat_endpoint(
    std::function<std::vector<std::string>(const std::string&, std::size_t)> reply,
    std::shared_ptr<std::atomic<int>> failures_before_success = nullptr) {
  return std::make_unique<HttpTestServer>(
      [reply = std::move(reply), failures_before_success](
          const httplib::Request& req, httplib::Response& res) {
        if (failures_before_success &&
            failures_before_success->fetch_sub(1) > 0) {
          res.status = 503;
          return;
        }
        nlohmann::json body = nlohmann::json::parse(req.body);
        std::string prompt = body["messages"][0]["content"].get<std::string>();
        std::size_t n = body.value("n", 1u);
        nlohmann::json choices = nlohmann::json::array();
        for (const std::string& text : reply(prompt, n))
          choices.push_back({{"message", {{"role", "assistant"}, {"content", text}}}});
        res.set_content(nlohmann::json{{"choices", choices}}.dump(),
                        "application/json");
      });
}

}  // namespace testsupport
