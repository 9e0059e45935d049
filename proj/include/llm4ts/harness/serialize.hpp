#pragma once

#include <nlohmann/json.hpp>

#include "llm4ts/harness/trial.hpp"

namespace llm4ts::harness {

inline nlohmann::ordered_json step_to_json(const StepRecord& s) {
  nlohmann::ordered_json j;
  j["t"] = s.t;
  j["c"] = s.c;
  j["h"] = s.h;
  j["d"] = s.d;
  j["w"] = s.w;
  j["candidate"] = s.candidate;
  if (s.verdict)
    j["verdict"] = (*s.verdict == judge::Verdict::allow) ? "allow" : "block";
  j["action"] = s.action;
  j["reward"] = s.reward;
  j["description"] = s.description;
  j["description_label"] = corpus::label_name(s.description_label);
  if (s.judge_latency_ms > 0.0) j["judge_latency_ms"] = s.judge_latency_ms;
  if (s.padded) j["padded"] = true;
  return j;
}

inline nlohmann::ordered_json trial_to_json(const TrialResult& r, bool include_steps = true) {
  nlohmann::ordered_json j;
  j["method"] = r.method_label;
  j["seed"] = r.seed;
  j["total_reward"] = r.total_reward;
  j["excess_steps"] = r.excess_steps;
  j["disengaged"] = r.disengaged;
  if (r.disengage_t) j["disengage_t"] = *r.disengage_t;
  j["msgs_sent"] = r.msgs_sent;
  j["msgs_blocked"] = r.msgs_blocked;
  j["judge_calls"] = r.judge_calls;
  j["judge_confusion"] = {{"tp", r.judge_tp}, {"fp", r.judge_fp},
                          {"tn", r.judge_tn}, {"fn", r.judge_fn}};
  j["mean_judge_latency_ms"] = r.mean_judge_latency_ms;
  j["max_judge_latency_ms"] = r.max_judge_latency_ms;
  if (include_steps) {
    auto steps = nlohmann::ordered_json::array();
    for (const StepRecord& s : r.steps) steps.push_back(step_to_json(s));
    j["steps"] = std::move(steps);
  }
  return j;
}

// Line-delimited per-step records, one object per line.
inline std::string steps_to_jsonl(const TrialResult& r) {
  std::string out;
  for (const StepRecord& s : r.steps) {
    out += step_to_json(s).dump();
    out += '\n';
  }
  return out;
}

}  // namespace llm4ts::harness
