#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "llm4ts/errors.hpp"
#include "llm4ts/rng.hpp"
#include "llm4ts/sim/env.hpp"

namespace llm4ts::ts {

// Linear-Gaussian Thompson Sampling configuration. The prior for every
// action is N(prior_mean * 1, prior_var * I) and rewards are modeled with
// noise variance sigma_y2.
struct TsConfig {
  int state_dim = 3;
  bool include_bias = false;  // append a constant-1 feature
  double prior_mean = 0.0;
  double prior_var = 100.0;
  double sigma_y2 = 625.0;  // 25^2

  int feature_dim() const { return state_dim + (include_bias ? 1 : 0); }

  void validate() const {
    if (state_dim < 1) throw ValidationError("state_dim must be >= 1");
    if (!(prior_var > 0.0)) throw ValidationError("prior_var must be > 0");
    if (!(sigma_y2 > 0.0)) throw ValidationError("sigma_y2 must be > 0");
  }
};

// Gaussian belief over one action's reward-model weights.
struct ActionPosterior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd Sigma;
  long n_updates = 0;
};

inline ActionPosterior make_prior(const TsConfig& cfg) {
  cfg.validate();
  const int n = cfg.feature_dim();
  ActionPosterior p;
  p.mu = Eigen::VectorXd::Constant(n, cfg.prior_mean);
  p.Sigma = cfg.prior_var * Eigen::MatrixXd::Identity(n, n);
  return p;
}

// Feature vector for the observed state [c, h, d] (+ optional bias 1).
inline Eigen::VectorXd make_features(int c, double h, double d, bool include_bias) {
  Eigen::VectorXd v(include_bias ? 4 : 3);
  v[0] = static_cast<double>(c);
  v[1] = h;
  v[2] = d;
  if (include_bias) v[3] = 1.0;
  return v;
}

struct ObservedState {
  Eigen::VectorXd v;
};

inline Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mu, const Eigen::MatrixXd& Sigma,
                                  Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError("sample_mvn: covariance is not positive definite");
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd z(mu.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = nd(rng);
  return mu + llt.matrixL() * z;
}

// Exact conjugate Bayesian linear-regression update for one observation.
// A zero feature vector carries no information and leaves the belief
// bit-identical.
inline ActionPosterior update_posterior(const ActionPosterior& post, const Eigen::VectorXd& v,
                                        double r, double sigma_y2) {
  if (!v.allFinite() || !std::isfinite(r))
    throw ValidationError("update_posterior: non-finite observation");
  if (v.isZero(0.0)) {
    ActionPosterior same = post;
    same.n_updates += 1;
    return same;
  }
  const Eigen::Index n = v.size();
  Eigen::LLT<Eigen::MatrixXd> llt(post.Sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError("update_posterior: covariance is not positive definite");
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd sigma_inv = llt.solve(identity);
  const Eigen::MatrixXd precision = sigma_inv + (v * v.transpose()) / sigma_y2;
  Eigen::LLT<Eigen::MatrixXd> llt2(precision);
  if (llt2.info() != Eigen::Success)
    throw NumericalError("update_posterior: updated precision not positive definite");
  Eigen::MatrixXd sigma_new = llt2.solve(identity);
  sigma_new = 0.5 * (sigma_new + sigma_new.transpose());  // kill round-off drift

  ActionPosterior out;
  out.Sigma = std::move(sigma_new);
  out.mu = out.Sigma * (sigma_inv * post.mu + (r / sigma_y2) * v);
  out.n_updates = post.n_updates + 1;
  return out;
}

// Samples weights from every action's posterior and returns the action with
// the largest sampled expected reward; ties go to the lowest action id. One
// posterior draw is consumed per action, in action order.
inline int propose_action(const std::vector<ActionPosterior>& posteriors,
                          const Eigen::VectorXd& v, Rng& rng) {
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < posteriors.size(); ++a) {
    const Eigen::VectorXd theta = sample_mvn(posteriors[a].mu, posteriors[a].Sigma, rng);
    const double val = theta.dot(v);
    if (val > best_val) {
      best_val = val;
      best = static_cast<int>(a);
    }
  }
  return best;
}

// Per-trial agent: one posterior per action, updated only for the action
// that was actually executed.
class TsAgent {
 public:
  TsAgent(TsConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
    cfg_.validate();
    posteriors_.reserve(sim::kNumActions);
    for (int a = 0; a < sim::kNumActions; ++a) posteriors_.push_back(make_prior(cfg_));
  }

  int propose(const Eigen::VectorXd& v) { return propose_action(posteriors_, v, rng_); }

  void update(int action, const Eigen::VectorXd& v, double reward) {
    posteriors_.at(static_cast<std::size_t>(action)) =
        update_posterior(posteriors_[static_cast<std::size_t>(action)], v, reward, cfg_.sigma_y2);
  }

  const ActionPosterior& posterior(int action) const {
    return posteriors_.at(static_cast<std::size_t>(action));
  }
  const TsConfig& config() const { return cfg_; }

 private:
  TsConfig cfg_;
  std::vector<ActionPosterior> posteriors_;
  Rng rng_;
};

}  // namespace llm4ts::ts
