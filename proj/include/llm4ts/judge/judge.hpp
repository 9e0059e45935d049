#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>

#include "llm4ts/corpus/corpus.hpp"
#include "llm4ts/errors.hpp"
#include "llm4ts/llm/client.hpp"
#include "llm4ts/prompt/parse.hpp"
#include "llm4ts/prompt/prompt.hpp"
#include "llm4ts/rng.hpp"

namespace llm4ts::judge {

enum class Verdict { allow, block };

enum class ParseOutcome { marker, fallback, fallback_default };

enum class JudgeKind { always_allow, oracle, noisy, llm };

inline const char* kind_name(JudgeKind k) {
  switch (k) {
    case JudgeKind::always_allow: return "always_allow";
    case JudgeKind::oracle: return "oracle";
    case JudgeKind::noisy: return "noisy";
    case JudgeKind::llm: return "llm";
  }
  return "?";
}

inline JudgeKind kind_from_string(const std::string& s) {
  if (s == "always_allow") return JudgeKind::always_allow;
  if (s == "oracle") return JudgeKind::oracle;
  if (s == "noisy") return JudgeKind::noisy;
  if (s == "llm") return JudgeKind::llm;
  throw ConfigError("unknown judge kind: \"" + s +
                    "\" (expected always_allow, oracle, noisy or llm)");
}

struct JudgeRequest {
  corpus::DescriptionEvent description;  // text plus latent ground-truth label
  prompt::PromptContext context;
  int t = 0;
};

struct JudgeDecision {
  Verdict verdict = Verdict::allow;
  JudgeKind source = JudgeKind::always_allow;
  double latency_ms = 0.0;  // exactly 0 for deterministic judges so logs stay byte-stable
  std::optional<std::string> raw_response;  // present iff source == llm
  int retries = 0;
  std::optional<ParseOutcome> parse_outcome;  // present iff source == llm
};

// Action-filter interface: decides whether a non-null candidate action may
// be executed given the participant's active state description.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual JudgeDecision decide(const JudgeRequest& req) = 0;
  virtual JudgeKind kind() const = 0;
};

class AlwaysAllowJudge final : public Judge {
 public:
  JudgeDecision decide(const JudgeRequest&) override {
    JudgeDecision d;
    d.verdict = Verdict::allow;
    d.source = JudgeKind::always_allow;
    return d;
  }
  JudgeKind kind() const override { return JudgeKind::always_allow; }
};

// Perfectly accurate filter with direct access to the latent walk state.
class OracleJudge final : public Judge {
 public:
  JudgeDecision decide(const JudgeRequest& req) override {
    JudgeDecision d;
    d.verdict = req.description.label == corpus::WalkLabel::can_walk ? Verdict::allow
                                                                     : Verdict::block;
    d.source = JudgeKind::oracle;
    return d;
  }
  JudgeKind kind() const override { return JudgeKind::oracle; }
};

struct NoisyParams {
  double p_false_block = 0.0;  // P(flip a correct Allow to Block)
  double p_false_allow = 0.0;  // P(flip a correct Block to Allow)

  void validate() const {
    if (p_false_block < 0.0 || p_false_block > 1.0 || p_false_allow < 0.0 ||
        p_false_allow > 1.0)
      throw ValidationError("noisy judge error rates must be in [0,1]");
  }
};

// Oracle with calibrated error rates; emulates an imperfect model without
// any network traffic.
class NoisyJudge final : public Judge {
 public:
  NoisyJudge(NoisyParams params, std::uint64_t seed) : params_(params), rng_(seed) {
    params_.validate();
  }

  JudgeDecision decide(const JudgeRequest& req) override {
    const bool truly_allow = req.description.label == corpus::WalkLabel::can_walk;
    Verdict v = truly_allow ? Verdict::allow : Verdict::block;
    if (truly_allow) {
      if (std::bernoulli_distribution(params_.p_false_block)(rng_)) v = Verdict::block;
    } else {
      if (std::bernoulli_distribution(params_.p_false_allow)(rng_)) v = Verdict::allow;
    }
    JudgeDecision d;
    d.verdict = v;
    d.source = JudgeKind::noisy;
    return d;
  }
  JudgeKind kind() const override { return JudgeKind::noisy; }

 private:
  NoisyParams params_;
  Rng rng_;
};

struct LlmJudgeParams {
  prompt::PromptComponents components;
  std::string template_text;  // empty -> builtin default
  int retry_budget = 2;       // re-asks on unparseable responses
  Verdict fallback = Verdict::allow;
  bool memoize = false;  // cache verdicts per description text
};

class LlmJudge final : public Judge {
 public:
  LlmJudge(const llm::Client& client, LlmJudgeParams params)
      : client_(client), params_(std::move(params)) {
    if (params_.retry_budget < 0) throw ValidationError("llm judge: retry_budget must be >= 0");
    if (params_.template_text.empty()) params_.template_text = prompt::default_template();
    params_.components.validate();
  }

  JudgeDecision decide(const JudgeRequest& req) override {
    if (params_.memoize) {
      auto it = cache_.find(req.description.text);
      if (it != cache_.end()) return it->second;
    }
    const auto start = std::chrono::steady_clock::now();
    const std::string rendered =
        prompt::render_prompt(params_.components, req.context, params_.template_text);

    JudgeDecision d;
    d.source = JudgeKind::llm;
    for (int attempt = 0;; ++attempt) {
      const llm::ChatResult res = client_.chat_complete(std::nullopt, rendered);
      d.raw_response = res.text;
      const prompt::ParsedDecision parsed = prompt::parse_decision_detailed(res.text);
      if (parsed.decision != prompt::Decision::unparseable) {
        d.verdict =
            parsed.decision == prompt::Decision::allow ? Verdict::allow : Verdict::block;
        d.parse_outcome = parsed.via_marker ? ParseOutcome::marker : ParseOutcome::fallback;
        d.retries = attempt;
        break;
      }
      if (attempt >= params_.retry_budget) {
        d.verdict = params_.fallback;
        d.parse_outcome = ParseOutcome::fallback_default;
        d.retries = attempt;
        break;
      }
    }
    d.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             start)
                       .count();
    if (params_.memoize) cache_.emplace(req.description.text, d);
    return d;
  }
  JudgeKind kind() const override { return JudgeKind::llm; }

 private:
  const llm::Client& client_;
  LlmJudgeParams params_;
  std::unordered_map<std::string, JudgeDecision> cache_;
};

// Judge selection as it appears in configs; the llm kind needs a client.
struct JudgeSpec {
  JudgeKind kind = JudgeKind::always_allow;
  NoisyParams noisy;
  int llm_retry_budget = 2;
  Verdict llm_fallback = Verdict::allow;
  bool llm_memoize = false;
};

inline std::unique_ptr<Judge> make_judge(const JudgeSpec& spec, std::uint64_t seed,
                                         const llm::Client* client,
                                         const prompt::PromptComponents& components,
                                         const std::string& template_text = {}) {
  switch (spec.kind) {
    case JudgeKind::always_allow:
      return std::make_unique<AlwaysAllowJudge>();
    case JudgeKind::oracle:
      return std::make_unique<OracleJudge>();
    case JudgeKind::noisy:
      return std::make_unique<NoisyJudge>(spec.noisy, seed);
    case JudgeKind::llm: {
      if (!client) throw ConfigError("llm judge requested but no endpoint is configured");
      LlmJudgeParams p;
      p.components = components;
      p.template_text = template_text;
      p.retry_budget = spec.llm_retry_budget;
      p.fallback = spec.llm_fallback;
      p.memoize = spec.llm_memoize;
      return std::make_unique<LlmJudge>(*client, std::move(p));
    }
  }
  throw ConfigError("invalid judge kind");
}

}  // namespace llm4ts::judge
