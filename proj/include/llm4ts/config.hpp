#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "llm4ts/errors.hpp"
#include "llm4ts/judge/judge.hpp"
#include "llm4ts/llm/client.hpp"
#include "llm4ts/prompt/prompt.hpp"
#include "llm4ts/sim/params.hpp"
#include "llm4ts/ts/agent.hpp"
#include "llm4ts/util.hpp"

namespace llm4ts::config {

// Resolved tool configuration: one document with sim, ts, judge, prompt,
// endpoint and corpus sections. Command-line flags override file values;
// LLM4TS_* environment variables override both for endpoint settings.
struct AppConfig {
  sim::SimParams sim;
  ts::TsConfig ts;
  judge::JudgeSpec judge;
  prompt::PromptComponents prompt;
  std::string prompt_preset = "BFQH";
  std::string prompt_template_file;  // empty -> builtin default
  llm::EndpointConfig endpoint;
  std::string corpus_file;
  double p_emit = 0.3;
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const char* section,
                       std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(std::string("config: unknown key \"") + it.key() + "\" in section " +
                        section);
  }
}

template <typename T>
void get_to(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      obj.at(key).get_to(out);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("config: bad value for \"") + key + "\"");
    }
  }
}

}  // namespace detail

inline judge::Verdict verdict_from_string(const std::string& s) {
  if (s == "allow") return judge::Verdict::allow;
  if (s == "block") return judge::Verdict::block;
  throw ConfigError("config: fallback verdict must be \"allow\" or \"block\"");
}

inline AppConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top-level value must be an object");
  detail::check_keys(doc, "(top level)",
                     {"sim", "ts", "judge", "prompt", "endpoint", "corpus"});
  AppConfig cfg;

  if (doc.contains("sim")) {
    const auto& s = doc["sim"];
    detail::check_keys(s, "sim",
                       {"sigma_ctx", "delta_h", "eps_h", "delta_d", "eps_d", "eta_d", "rho1",
                        "rho2", "m_s", "p_w00", "p_w11", "horizon", "h0", "d0"});
    detail::get_to(s, "sigma_ctx", cfg.sim.sigma_ctx);
    detail::get_to(s, "delta_h", cfg.sim.delta_h);
    detail::get_to(s, "eps_h", cfg.sim.eps_h);
    detail::get_to(s, "delta_d", cfg.sim.delta_d);
    detail::get_to(s, "eps_d", cfg.sim.eps_d);
    detail::get_to(s, "eta_d", cfg.sim.eta_d);
    detail::get_to(s, "rho1", cfg.sim.rho1);
    detail::get_to(s, "rho2", cfg.sim.rho2);
    detail::get_to(s, "m_s", cfg.sim.m_s);
    detail::get_to(s, "p_w00", cfg.sim.p_w00);
    detail::get_to(s, "p_w11", cfg.sim.p_w11);
    detail::get_to(s, "horizon", cfg.sim.horizon);
    detail::get_to(s, "h0", cfg.sim.h0);
    detail::get_to(s, "d0", cfg.sim.d0);
  }

  if (doc.contains("ts")) {
    const auto& t = doc["ts"];
    detail::check_keys(t, "ts",
                       {"state_dim", "include_bias", "prior_mean", "prior_var", "sigma_y2"});
    detail::get_to(t, "state_dim", cfg.ts.state_dim);
    detail::get_to(t, "include_bias", cfg.ts.include_bias);
    detail::get_to(t, "prior_mean", cfg.ts.prior_mean);
    detail::get_to(t, "prior_var", cfg.ts.prior_var);
    detail::get_to(t, "sigma_y2", cfg.ts.sigma_y2);
  }

  if (doc.contains("judge")) {
    const auto& j = doc["judge"];
    detail::check_keys(j, "judge",
                       {"kind", "p_false_block", "p_false_allow", "retry_budget", "fallback",
                        "memoize"});
    std::string kind = judge::kind_name(cfg.judge.kind);
    detail::get_to(j, "kind", kind);
    cfg.judge.kind = judge::kind_from_string(kind);
    detail::get_to(j, "p_false_block", cfg.judge.noisy.p_false_block);
    detail::get_to(j, "p_false_allow", cfg.judge.noisy.p_false_allow);
    detail::get_to(j, "retry_budget", cfg.judge.llm_retry_budget);
    if (j.contains("fallback"))
      cfg.judge.llm_fallback = verdict_from_string(j["fallback"].get<std::string>());
    detail::get_to(j, "memoize", cfg.judge.llm_memoize);
  }

  if (doc.contains("prompt")) {
    const auto& p = doc["prompt"];
    detail::check_keys(p, "prompt",
                       {"preset", "history_len", "include_candidate", "template_file"});
    detail::get_to(p, "preset", cfg.prompt_preset);
    cfg.prompt = prompt::preset(cfg.prompt_preset);
    detail::get_to(p, "history_len", cfg.prompt.history_len);
    detail::get_to(p, "include_candidate", cfg.prompt.include_candidate);
    detail::get_to(p, "template_file", cfg.prompt_template_file);
  } else {
    cfg.prompt = prompt::preset(cfg.prompt_preset);
  }

  if (doc.contains("endpoint")) {
    const auto& e = doc["endpoint"];
    detail::check_keys(e, "endpoint",
                       {"base_url", "api_key", "model", "temperature", "timeout_ms",
                        "transport_retries", "max_tokens", "max_in_flight", "backoff_ms"});
    detail::get_to(e, "base_url", cfg.endpoint.base_url);
    detail::get_to(e, "api_key", cfg.endpoint.api_key);
    detail::get_to(e, "model", cfg.endpoint.model);
    detail::get_to(e, "temperature", cfg.endpoint.temperature);
    detail::get_to(e, "timeout_ms", cfg.endpoint.timeout_ms);
    detail::get_to(e, "transport_retries", cfg.endpoint.transport_retries);
    if (e.contains("max_tokens") && !e["max_tokens"].is_null())
      cfg.endpoint.max_tokens = e["max_tokens"].get<int>();
    detail::get_to(e, "max_in_flight", cfg.endpoint.max_in_flight);
    detail::get_to(e, "backoff_ms", cfg.endpoint.backoff_ms);
  }

  if (doc.contains("corpus")) {
    const auto& c = doc["corpus"];
    detail::check_keys(c, "corpus", {"file", "p_emit"});
    detail::get_to(c, "file", cfg.corpus_file);
    detail::get_to(c, "p_emit", cfg.p_emit);
  }
  return cfg;
}

inline AppConfig load_config_file(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

// Environment variables win over config-file endpoint values so secrets can
// stay out of files.
inline void apply_env_overrides(llm::EndpointConfig& endpoint) {
  if (const char* v = std::getenv("LLM4TS_BASE_URL")) endpoint.base_url = v;
  if (const char* v = std::getenv("LLM4TS_API_KEY")) endpoint.api_key = v;
  if (const char* v = std::getenv("LLM4TS_MODEL")) endpoint.model = v;
}

// Snapshot of the fully resolved configuration; the api key is never
// serialized.
inline nlohmann::ordered_json config_to_json(const AppConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["sim"] = {{"sigma_ctx", cfg.sim.sigma_ctx}, {"delta_h", cfg.sim.delta_h},
                {"eps_h", cfg.sim.eps_h},         {"delta_d", cfg.sim.delta_d},
                {"eps_d", cfg.sim.eps_d},         {"eta_d", cfg.sim.eta_d},
                {"rho1", cfg.sim.rho1},           {"rho2", cfg.sim.rho2},
                {"m_s", cfg.sim.m_s},             {"p_w00", cfg.sim.p_w00},
                {"p_w11", cfg.sim.p_w11},         {"horizon", cfg.sim.horizon},
                {"h0", cfg.sim.h0},               {"d0", cfg.sim.d0}};
  doc["ts"] = {{"state_dim", cfg.ts.state_dim},
               {"include_bias", cfg.ts.include_bias},
               {"prior_mean", cfg.ts.prior_mean},
               {"prior_var", cfg.ts.prior_var},
               {"sigma_y2", cfg.ts.sigma_y2}};
  doc["judge"] = {{"kind", judge::kind_name(cfg.judge.kind)},
                  {"p_false_block", cfg.judge.noisy.p_false_block},
                  {"p_false_allow", cfg.judge.noisy.p_false_allow},
                  {"retry_budget", cfg.judge.llm_retry_budget},
                  {"fallback", cfg.judge.llm_fallback == judge::Verdict::allow ? "allow"
                                                                               : "block"},
                  {"memoize", cfg.judge.llm_memoize}};
  doc["prompt"] = {{"preset", cfg.prompt_preset},
                   {"history_len", cfg.prompt.history_len},
                   {"include_candidate", cfg.prompt.include_candidate},
                   {"template_file", cfg.prompt_template_file}};
  doc["endpoint"] = {{"base_url", cfg.endpoint.base_url},
                     {"model", cfg.endpoint.model},
                     {"temperature", cfg.endpoint.temperature},
                     {"timeout_ms", cfg.endpoint.timeout_ms},
                     {"transport_retries", cfg.endpoint.transport_retries},
                     {"max_in_flight", cfg.endpoint.max_in_flight},
                     {"backoff_ms", cfg.endpoint.backoff_ms}};
  if (cfg.endpoint.max_tokens) doc["endpoint"]["max_tokens"] = *cfg.endpoint.max_tokens;
  doc["corpus"] = {{"file", cfg.corpus_file}, {"p_emit", cfg.p_emit}};
  return doc;
}

// Loads the active prompt template, preferring an explicit file.
inline std::string resolve_prompt_template(const AppConfig& cfg) {
  if (!cfg.prompt_template_file.empty()) return read_text_file(cfg.prompt_template_file);
  return prompt::default_template();
}

}  // namespace llm4ts::config
