#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "llm4ts/corpus/corpus.hpp"
#include "llm4ts/judge/judge.hpp"
#include "llm4ts/prompt/prompt.hpp"
#include "llm4ts/rng.hpp"
#include "llm4ts/sim/env.hpp"
#include "llm4ts/ts/agent.hpp"

namespace llm4ts::harness {

// Everything one simulated participant run depends on. The seed fully
// determines the trajectory for non-llm judges.
struct TrialConfig {
  sim::SimParams sim;
  ts::TsConfig ts;
  judge::JudgeSpec judge;
  bool judge_enabled = true;  // false removes the filter stage entirely
  prompt::PromptComponents prompt;
  std::string prompt_template;  // empty -> builtin default
  double p_emit = 0.3;
  std::uint64_t seed = 0;
  std::string method_label = "ts";
};

struct StepRecord {
  int t = 0;
  int c = 0;        // observed state at decision time
  double h = 0.0;
  double d = 0.0;
  int w = 1;        // latent walk state at decision time
  int candidate = 0;
  std::optional<judge::Verdict> verdict;  // present iff the judge was consulted
  int action = 0;
  double reward = 0.0;
  std::string description;  // active participant reply at decision time
  corpus::WalkLabel description_label = corpus::WalkLabel::can_walk;
  double judge_latency_ms = 0.0;
  bool padded = false;  // filler row after disengagement
};

struct TrialResult {
  std::vector<StepRecord> steps;
  double total_reward = 0.0;
  double excess_steps = 0.0;  // sum of (r_t - m_s * w_t) over decided steps
  bool disengaged = false;
  std::optional<int> disengage_t;
  long msgs_sent = 0;
  long msgs_blocked = 0;
  long judge_calls = 0;
  long judge_tp = 0, judge_fp = 0, judge_tn = 0, judge_fn = 0;
  double mean_judge_latency_ms = 0.0;
  double max_judge_latency_ms = 0.0;
  std::string method_label;
  std::uint64_t seed = 0;
};

namespace detail {

// Sub-stream tags so env/agent/corpus/judge randomness never interleave;
// consulting (or removing) the judge cannot perturb the environment.
enum : std::uint64_t { kEnvStream = 1, kAgentStream = 2, kCorpusStream = 3, kJudgeStream = 4 };

}  // namespace detail

inline std::unique_ptr<judge::Judge> make_trial_judge(const TrialConfig& cfg,
                                                      const llm::Client* client) {
  if (!cfg.judge_enabled) return nullptr;
  return judge::make_judge(cfg.judge, derive_seed(cfg.seed, detail::kJudgeStream), client,
                           cfg.prompt, cfg.prompt_template);
}

// One full trial of the hybrid decision loop: the agent proposes a candidate
// action from the observed state [c, h, d]; a non-null candidate is passed
// through the judge, which may veto it down to the null action; the
// environment transitions and the executed action's posterior is updated
// with the realized reward. Steps after disengagement are logged with zero
// reward and no actions.
inline TrialResult run_trial(const TrialConfig& cfg, const corpus::Corpus& corpus,
                             const llm::Client* client = nullptr) {
  cfg.sim.validate();
  cfg.ts.validate();
  cfg.prompt.validate();
  if (cfg.p_emit < 0.0 || cfg.p_emit > 1.0)
    throw ValidationError("p_emit must be in [0,1]");

  sim::Environment env(cfg.sim, derive_seed(cfg.seed, detail::kEnvStream));
  ts::TsAgent agent(cfg.ts, derive_seed(cfg.seed, detail::kAgentStream));
  Rng corpus_rng(derive_seed(cfg.seed, detail::kCorpusStream));
  std::unique_ptr<judge::Judge> the_judge = make_trial_judge(cfg, client);

  TrialResult out;
  out.method_label = cfg.method_label;
  out.seed = cfg.seed;
  out.steps.reserve(static_cast<std::size_t>(cfg.sim.horizon));

  // Trials begin able to walk; an initial description is always on file so
  // the filter stage has something to read at t = 0.
  corpus::DescriptionEvent active{0, corpus::sample_pool(corpus.can_walk, corpus_rng),
                                  corpus::WalkLabel::can_walk};

  std::deque<prompt::HistoryRecord> history;
  double latency_sum = 0.0;

  for (int t = 0; t < cfg.sim.horizon; ++t) {
    if (env.state().disengaged) {
      StepRecord pad;
      pad.t = t;
      pad.c = env.state().c;
      pad.h = env.state().h;
      pad.d = env.state().d;
      pad.w = env.state().w;
      pad.description = active.text;
      pad.description_label = active.label;
      pad.padded = true;
      out.steps.push_back(std::move(pad));
      continue;
    }

    const sim::EnvState s = env.state();
    const Eigen::VectorXd v = ts::make_features(s.c, s.h, s.d, cfg.ts.include_bias);
    const int candidate = agent.propose(v);

    StepRecord rec;
    rec.t = t;
    rec.c = s.c;
    rec.h = s.h;
    rec.d = s.d;
    rec.w = s.w;
    rec.candidate = candidate;
    rec.description = active.text;
    rec.description_label = active.label;

    int executed = candidate;
    if (candidate != 0) {
      if (the_judge) {
        judge::JudgeRequest req;
        req.t = t;
        req.description = active;
        req.context.description = active.text;
        req.context.candidate_action = candidate;
        req.context.history.assign(history.begin(), history.end());
        req.context.history.push_back({s.c, s.h, s.d, std::nullopt, std::nullopt});
        const judge::JudgeDecision dec = the_judge->decide(req);
        ++out.judge_calls;
        rec.verdict = dec.verdict;
        rec.judge_latency_ms = dec.latency_ms;
        latency_sum += dec.latency_ms;
        out.max_judge_latency_ms = std::max(out.max_judge_latency_ms, dec.latency_ms);
        const bool predicted_send = dec.verdict == judge::Verdict::allow;
        const bool true_send = s.w == 1;
        if (true_send && predicted_send) ++out.judge_tp;
        if (true_send && !predicted_send) ++out.judge_fn;
        if (!true_send && predicted_send) ++out.judge_fp;
        if (!true_send && !predicted_send) ++out.judge_tn;
        if (dec.verdict == judge::Verdict::block) {
          executed = 0;
          ++out.msgs_blocked;
        } else {
          ++out.msgs_sent;
        }
      } else {
        ++out.msgs_sent;
      }
    }

    const sim::StepResult step = env.step(sim::action_from_int(executed));
    rec.action = executed;
    rec.reward = step.reward;
    out.total_reward += step.reward;
    out.excess_steps += step.reward - cfg.sim.m_s * s.w;

    agent.update(executed, v, step.reward);

    history.push_back({s.c, s.h, s.d, executed, step.reward});
    while (static_cast<int>(history.size()) > std::max(0, cfg.prompt.history_len - 1))
      history.pop_front();

    if (auto emitted = corpus::emit_description(s.w, env.state().w, corpus_rng, cfg.p_emit,
                                                corpus, t + 1)) {
      active = *emitted;
    }

    if (env.state().disengaged) {
      out.disengaged = true;
      out.disengage_t = t;
    }
    out.steps.push_back(std::move(rec));
  }

  if (out.judge_calls > 0)
    out.mean_judge_latency_ms = latency_sum / static_cast<double>(out.judge_calls);
  return out;
}

}  // namespace llm4ts::harness
