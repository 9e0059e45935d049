#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "llm4ts/errors.hpp"

namespace llm4ts::llm {

// Connection settings for an OpenAI-compatible chat-completions endpoint.
// base_url/api_key/model may be overridden by the LLM4TS_BASE_URL,
// LLM4TS_API_KEY and LLM4TS_MODEL environment variables (see config).
struct EndpointConfig {
  std::string base_url;
  std::string api_key;
  std::string model;
  double temperature = 0.2;
  int timeout_ms = 30000;
  int transport_retries = 2;
  std::optional<int> max_tokens;
  int max_in_flight = 4;
  int backoff_ms = 100;  // initial retry backoff, doubled per attempt

  bool configured() const { return !base_url.empty() && !model.empty(); }

  void validate() const {
    if (base_url.empty()) throw ConfigError("endpoint: base_url is empty");
    if (model.empty()) throw ConfigError("endpoint: model is empty");
    if (timeout_ms <= 0) throw ConfigError("endpoint: timeout must be > 0");
    if (transport_retries < 0) throw ConfigError("endpoint: transport_retries must be >= 0");
    if (max_in_flight < 1) throw ConfigError("endpoint: max_in_flight must be >= 1");
  }
};

struct Usage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
  bool estimated = false;  // true when derived from character counts
};

struct ChatResult {
  std::string text;
  double latency_ms = 0.0;
  std::optional<Usage> usage;
  int http_status = 0;
  int retries = 0;
};

// Process-wide count of HTTP requests issued; simulation-only runs assert
// this stays at zero.
inline std::atomic<std::uint64_t>& request_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

// Rough chars/4 token estimate for servers that do not report usage.
inline Usage estimate_usage(const std::string& prompt, const std::string& completion) {
  return Usage{static_cast<long>(prompt.size() / 4),
               static_cast<long>(completion.size() / 4), true};
}

namespace detail {

struct ParsedUrl {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // optional, no trailing slash
};

inline ParsedUrl parse_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("endpoint: base_url must start with http:// or https://");
  const auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

}  // namespace detail

// Field order is fixed so request bodies are byte-stable for fixed inputs.
inline std::string build_request_body(const EndpointConfig& cfg,
                                      const std::optional<std::string>& system,
                                      const std::string& user) {
  nlohmann::ordered_json body;
  body["model"] = cfg.model;
  body["messages"] = nlohmann::ordered_json::array();
  if (system) body["messages"].push_back({{"role", "system"}, {"content", *system}});
  body["messages"].push_back({{"role", "user"}, {"content", user}});
  body["temperature"] = cfg.temperature;
  if (cfg.max_tokens) body["max_tokens"] = *cfg.max_tokens;
  return body.dump();
}

// Minimal chat-completions client. Shareable across threads; a per-client
// cap bounds concurrent in-flight requests so local inference servers are
// not swamped.
class Client {
 public:
  explicit Client(EndpointConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const EndpointConfig& config() const { return cfg_; }

  ChatResult chat_complete(const std::optional<std::string>& system,
                           const std::string& user) const {
    const std::string body = build_request_body(cfg_, system, user);
    const detail::ParsedUrl url = detail::parse_base_url(cfg_.base_url);
    const std::string path = url.path_prefix + "/v1/chat/completions";

    InFlightSlot slot(*this);
    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    int last_status = 0;
    for (int attempt = 0;; ++attempt) {
      httplib::Client cli(url.origin);
      cli.set_connection_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
      cli.set_read_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
      cli.set_write_timeout(std::chrono::milliseconds(cfg_.timeout_ms));
      httplib::Headers headers;
      if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

      request_counter().fetch_add(1, std::memory_order_relaxed);
      auto res = cli.Post(path, headers, body, "application/json");

      if (res && res->status >= 200 && res->status < 300) {
        ChatResult out = parse_response(res->body, user);
        out.http_status = res->status;
        out.retries = attempt;
        out.latency_ms = elapsed_ms(start);
        return out;
      }
      if (res && res->status < 500) {
        throw HttpError(res->status, "endpoint returned HTTP " + std::to_string(res->status) +
                                         ": " + snippet(res->body));
      }
      if (res) {
        last_status = res->status;
        last_error = snippet(res->body);
      } else {
        last_status = 0;
        last_error = httplib::to_string(res.error());
      }
      if (attempt >= cfg_.transport_retries) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.backoff_ms << attempt));
    }
    if (last_status != 0)
      throw HttpError(last_status, "endpoint returned HTTP " + std::to_string(last_status) +
                                       " after retries: " + last_error);
    throw Timeout("endpoint unreachable after " + std::to_string(cfg_.transport_retries + 1) +
                  " attempts: " + last_error);
  }

 private:
  static double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }

  static std::string snippet(const std::string& body) {
    return body.size() <= 200 ? body : body.substr(0, 200) + "...";
  }

  static ChatResult parse_response(const std::string& body, const std::string& prompt) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedResponse(std::string("response is not valid JSON: ") + e.what());
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
      throw MalformedResponse("response has no choices");
    const auto& msg = j["choices"][0];
    if (!msg.contains("message") || !msg["message"].contains("content") ||
        !msg["message"]["content"].is_string())
      throw MalformedResponse("response choice has no message content");
    ChatResult out;
    out.text = msg["message"]["content"].get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
      Usage u;
      u.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      u.completion_tokens = j["usage"].value("completion_tokens", 0L);
      out.usage = u;
    } else {
      out.usage = estimate_usage(prompt, out.text);
    }
    return out;
  }

  struct InFlightSlot {
    explicit InFlightSlot(const Client& c) : client(c) {
      std::unique_lock lk(client.mu_);
      client.cv_.wait(lk, [&] { return client.in_flight_ < client.cfg_.max_in_flight; });
      ++client.in_flight_;
    }
    ~InFlightSlot() {
      {
        std::lock_guard lk(client.mu_);
        --client.in_flight_;
      }
      client.cv_.notify_one();
    }
    const Client& client;
  };

  EndpointConfig cfg_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  mutable int in_flight_ = 0;
};

}  // namespace llm4ts::llm
