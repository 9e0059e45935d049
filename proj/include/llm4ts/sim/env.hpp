#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "llm4ts/errors.hpp"
#include "llm4ts/rng.hpp"
#include "llm4ts/sim/params.hpp"

namespace llm4ts::sim {

inline constexpr int kNumActions = 4;

// Message choice at a decision point.
enum class Action : int {
  none = 0,        // no message
  untailored = 1,  // generic message
  tailored0 = 2,   // message tailored to context 0
  tailored1 = 3,   // message tailored to context 1
};

inline Action action_from_int(int v) {
  if (v < 0 || v >= kNumActions) throw ValidationError("action must be in {0,1,2,3}");
  return static_cast<Action>(v);
}

inline int action_index(Action a) { return static_cast<int>(a); }

inline bool is_message(Action a) { return a != Action::none; }

// A message counts as a correct choice when it is untailored or tailored to
// the true context; only a mismatched tailored message is a tailoring error.
inline bool correct_choice(Action a, int c) {
  return a == Action::untailored || action_index(a) == c + 2;
}

// Full latent participant state plus the inferred-context fields.
struct EnvState {
  int t = 0;            // decision-point index
  int c = 0;            // true binary context
  double x = 0.0;       // continuous context feature
  double p_ctx = 0.5;   // posterior probability of context 1
  int l = 0;            // inferred context (p_ctx > 0.5)
  double h = 0.0;       // habituation level in [0,1]
  double d = 0.0;       // disengagement risk in [0,1]
  int w = 1;            // walk ability: 1 = can walk
  bool disengaged = false;
};

struct ContextDraw {
  int c;
  double x;
  double p_ctx;
  int l;
};

// Exact Bayes posterior P(C=1|x) for the two unit-variance-separated class
// likelihoods N(x; c, sigma^2) with equal priors.
inline double context_posterior(double x, double sigma_ctx) {
  return 1.0 / (1.0 + std::exp(-(2.0 * x - 1.0) / (2.0 * sigma_ctx * sigma_ctx)));
}

inline ContextDraw sample_context(Rng& rng, double sigma_ctx) {
  const int c = std::bernoulli_distribution(0.5)(rng) ? 1 : 0;
  const double x = std::normal_distribution<double>(static_cast<double>(c), sigma_ctx)(rng);
  const double p = context_posterior(x, sigma_ctx);
  return {c, x, p, p > 0.5 ? 1 : 0};
}

inline double update_habituation(double h, Action a, double delta_h, double eps_h) {
  if (a == Action::none) return (1.0 - delta_h) * h;
  return std::min(1.0, h + eps_h);
}

inline double update_disengagement(double d, Action a, int c, int w, double delta_d,
                                   double eps_d, double eta_d) {
  if (a == Action::none) return d;
  if (correct_choice(a, c)) {
    if (w == 1) return (1.0 - delta_d) * d;
    return std::min(1.0, d + eta_d);
  }
  return std::min(1.0, d + eps_d + (1 - w) * eta_d);
}

// Step count produced by action a. Uses the post-update habituation level and
// the walk state active when the action was taken; an unable-to-walk
// participant accrues zero steps in every branch.
inline double step_count(Action a, int c, int w, double h_next, double m_s, double rho1,
                         double rho2) {
  if (w == 1) {
    if (a == Action::untailored) return m_s + (1.0 - h_next) * rho1;
    if (is_message(a) && action_index(a) == c + 2) return m_s + (1.0 - h_next) * rho2;
  }
  return m_s * w;
}

inline int update_walk_state(int w, Rng& rng, double p_w00, double p_w11) {
  const double p_stay = (w == 0) ? p_w00 : p_w11;
  return std::bernoulli_distribution(p_stay)(rng) ? w : 1 - w;
}

// Floating-point-safe reading of "risk reaches 1".
inline bool disengage_triggered(double d) { return d >= 1.0 - 1e-12; }

enum class EventKind { disengaged, walk_transition };

struct EnvEvent {
  EventKind kind;
  int from = 0;
  int to = 0;
};

struct StepResult {
  EnvState next;
  double reward = 0.0;
  std::vector<EnvEvent> events;
};

// One environment transition: habituation, disengagement and step count are
// computed from the pre-transition context and walk state, then the walk
// state and the context for the next decision point are resampled.
inline StepResult env_step(const EnvState& s, Action a, Rng& rng, const SimParams& p) {
  if (s.disengaged) throw StepAfterTermination("env_step called on a disengaged state");
  EnvState n = s;
  n.t = s.t + 1;
  n.h = update_habituation(s.h, a, p.delta_h, p.eps_h);
  n.d = update_disengagement(s.d, a, s.c, s.w, p.delta_d, p.eps_d, p.eta_d);
  const double z = step_count(a, s.c, s.w, n.h, p.m_s, p.rho1, p.rho2);
  n.w = update_walk_state(s.w, rng, p.p_w00, p.p_w11);
  const ContextDraw ctx = sample_context(rng, p.sigma_ctx);
  n.c = ctx.c;
  n.x = ctx.x;
  n.p_ctx = ctx.p_ctx;
  n.l = ctx.l;

  StepResult out;
  if (n.w != s.w) out.events.push_back({EventKind::walk_transition, s.w, n.w});
  if (disengage_triggered(n.d)) {
    n.disengaged = true;
    out.events.push_back({EventKind::disengaged});
  }
  out.next = n;
  out.reward = z;
  return out;
}

// Owns one participant's state and random stream. Instances are independent;
// run one per seed for parallel trials.
class Environment {
 public:
  Environment(SimParams params, std::uint64_t seed) : params_(params) {
    params_.validate();
    reset(seed);
  }

  void reset(std::uint64_t seed) {
    rng_.seed(seed);
    state_ = EnvState{};
    state_.h = params_.h0;
    state_.d = params_.d0;
    state_.w = 1;  // trials always begin able to walk
    const ContextDraw ctx = sample_context(rng_, params_.sigma_ctx);
    state_.c = ctx.c;
    state_.x = ctx.x;
    state_.p_ctx = ctx.p_ctx;
    state_.l = ctx.l;
  }

  const EnvState& state() const { return state_; }
  const SimParams& params() const { return params_; }

  StepResult step(Action a) {
    StepResult r = env_step(state_, a, rng_, params_);
    state_ = r.next;
    return r;
  }

 private:
  SimParams params_;
  EnvState state_;
  Rng rng_;
};

}  // namespace llm4ts::sim
