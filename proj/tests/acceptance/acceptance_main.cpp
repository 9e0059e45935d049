// Acceptance suite: end-to-end checks of the simulator, the Thompson-sampling
// updates, the judge pipeline and the experiment harness. Each criterion
// prints one PASS/FAIL line; the process exits non-zero if any fail.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "llm4ts/corpus/corpus.hpp"
#include "llm4ts/eval/metrics.hpp"
#include "llm4ts/harness/experiment.hpp"
#include "llm4ts/judge/judge.hpp"
#include "llm4ts/llm/client.hpp"
#include "llm4ts/prompt/parse.hpp"
#include "llm4ts/prompt/prompt.hpp"
#include "llm4ts/sim/env.hpp"
#include "llm4ts/ts/agent.hpp"
#include "llm4ts/util.hpp"
#include "../mock_server.hpp"

using namespace llm4ts;

namespace {

int g_failures = 0;

struct Check {
  std::string name;
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    } else if (!cond) {
      detail += "; " + what;
    }
  }

  void report(double seconds) const {
    std::printf("%s  %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), seconds,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!ok) ++g_failures;
  }
};

void run_criterion(const std::string& name, const std::function<void(Check&)>& body) {
  Check check;
  check.name = name;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check.report(secs);
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// --------------------------------------------------------------------------
// 1. Logged-trajectory replay: the published four-record history pins every
// dynamics equation. Each logged transition is replayed through the
// corresponding update with its logged inputs. The display tolerance carries
// a 1e-12 slack because two D values sit exactly on the 5e-4 rounding
// boundary in binary floating point.
void criterion_fig2_replay(Check& check) {
  const double kTol = 5e-4 + 1e-12;
  sim::SimParams p;  // eps_h=0.05, eps_d=eta_d=0.05, delta_d=0.1, rho2=200, m_s=0.1

  // habituation chain under repeated messaging: 0.381 -> 0.431 -> 0.481 -> 0.531
  const double h_logged[4] = {0.381, 0.431, 0.481, 0.531};
  double h = h_logged[0];
  for (int i = 0; i < 3; ++i) {
    h = sim::update_habituation(h, sim::Action::tailored0, p.delta_h, p.eps_h);
    check.expect(close(h, h_logged[i + 1], kTol),
                 "habituation step " + std::to_string(i) + " = " + fmt_g(h));
  }

  // disengagement chain: incorrect tailoring while unable to walk, then
  // correct tailoring while able, then incorrect while unable again
  const double d1 = sim::update_disengagement(0.165, sim::Action::tailored0, /*c=*/1, /*w=*/0,
                                              p.delta_d, p.eps_d, p.eta_d);
  check.expect(close(d1, 0.265, kTol), "d step 0 = " + fmt_g(d1));
  const double d2 = sim::update_disengagement(d1, sim::Action::tailored0, /*c=*/0, /*w=*/1,
                                              p.delta_d, p.eps_d, p.eta_d);
  check.expect(close(d2, 0.238, kTol), "d step 1 = " + fmt_g(d2));
  const double d3 = sim::update_disengagement(d2, sim::Action::tailored0, /*c=*/1, /*w=*/0,
                                              p.delta_d, p.eps_d, p.eta_d);
  check.expect(close(d3, 0.338, kTol), "d step 2 = " + fmt_g(d3));

  // rewards: incorrect tailoring earns the baseline, correct tailoring the
  // attenuated bonus, each with the post-update habituation level
  const double r0 = sim::step_count(sim::Action::tailored0, /*c=*/1, /*w=*/1, h_logged[1],
                                    p.m_s, p.rho1, p.rho2);
  const double r1 = sim::step_count(sim::Action::tailored0, /*c=*/0, /*w=*/1, h_logged[2],
                                    p.m_s, p.rho1, p.rho2);
  const double r2 = sim::step_count(sim::Action::tailored0, /*c=*/1, /*w=*/1, h_logged[3],
                                    p.m_s, p.rho1, p.rho2);
  check.expect(close(r0, 0.1, kTol), "reward 0 = " + fmt_g(r0));
  check.expect(close(r1, 103.9, kTol), "reward 1 = " + fmt_g(r1));
  check.expect(close(r2, 0.1, kTol), "reward 2 = " + fmt_g(r2));
}

// --------------------------------------------------------------------------
// 2. Sequential posterior updates against an independent batch oracle, plus
// the 1-D worked case.
void criterion_posterior_oracle(Check& check) {
  ts::TsConfig cfg;
  ts::ActionPosterior post = ts::make_prior(cfg);
  const Eigen::MatrixXd prior_precision = post.Sigma.inverse();
  const Eigen::VectorXd prior_rhs = prior_precision * post.mu;

  Rng rng(20250815);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd precision = prior_precision;
  Eigen::VectorXd rhs = prior_rhs;
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd v(3);
    v << nd(rng), nd(rng), nd(rng);
    const double r = 100.0 * nd(rng);
    post = ts::update_posterior(post, v, r, cfg.sigma_y2);
    precision += v * v.transpose() / cfg.sigma_y2;
    rhs += r * v / cfg.sigma_y2;
  }
  Eigen::MatrixXd sigma_batch = precision.inverse();
  sigma_batch = 0.5 * (sigma_batch + sigma_batch.transpose());
  const Eigen::VectorXd mu_batch = sigma_batch * rhs;
  const double sigma_err = (post.Sigma - sigma_batch).norm();
  const double mu_err = (post.mu - mu_batch).norm();
  check.expect(sigma_err < 1e-10, "|Sigma - batch| = " + fmt_g(sigma_err));
  check.expect(mu_err < 1e-10, "|mu - batch| = " + fmt_g(mu_err));

  ts::ActionPosterior one;
  one.mu = Eigen::VectorXd::Zero(1);
  one.Sigma = Eigen::MatrixXd::Constant(1, 1, 100.0);
  Eigen::VectorXd v1(1);
  v1 << 1.0;
  const ts::ActionPosterior updated = ts::update_posterior(one, v1, 50.0, 625.0);
  check.expect(close(updated.Sigma(0, 0), 86.2069, 1e-4),
               "1-D Sigma' = " + fmt_g(updated.Sigma(0, 0)));
  check.expect(close(updated.mu(0), 6.89655, 1e-4), "1-D mu' = " + fmt_g(updated.mu(0)));
}

// --------------------------------------------------------------------------
// 3. Walk-chain occupancy vs the analytic stationary distribution in all
// four scenarios.
void criterion_walk_occupancy(Check& check) {
  Rng rng(7001);
  for (int id = 1; id <= 4; ++id) {
    const auto [p11, p00] = harness::scenario_params(id);
    const double expected = (1.0 - p11) / ((1.0 - p11) + (1.0 - p00));
    int w = 1;
    long zeros = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      w = sim::update_walk_state(w, rng, p00, p11);
      if (w == 0) ++zeros;
    }
    const double occupancy = static_cast<double>(zeros) / n;
    check.expect(close(occupancy, expected, 0.02),
                 "scenario " + std::to_string(id) + ": P(w=0) = " + fmt_g(occupancy) +
                     " vs " + fmt_g(expected));
  }
}

// --------------------------------------------------------------------------
// 4. Judge validation: the oracle is perfect on the bundled corpus; the
// calibrated noisy judge reproduces the target send recall.
void criterion_judge_validation(Check& check) {
  const corpus::Corpus corpus = corpus::load_corpus_file(LLM4TS_DATA_DIR "/corpus_seed.json");

  judge::OracleJudge oracle;
  Rng rng(41);
  const eval::EvalMetrics m = eval::validate_judge(oracle, corpus, 500, rng);
  check.expect(m.accuracy == 1.0 && m.send.precision == 1.0 && m.send.recall == 1.0 &&
                   m.send.f1 == 1.0,
               "oracle metrics not all 1.0");

  judge::NoisyJudge noisy({0.119, 0.0}, 42);
  Rng rng2(43);
  const eval::EvalMetrics nm = eval::validate_judge(noisy, corpus, 5000, rng2);
  check.expect(close(nm.send.recall, 0.881, 0.015),
               "noisy send recall = " + fmt_g(nm.send.recall));
}

// --------------------------------------------------------------------------
// 5. Directional comparison on the full scenario grid with 200 seeds per
// cell: the filtered policy must beat plain Thompson sampling wherever the
// can't-walk state is common, with the gap growing in eta_d, shrinking when
// the state is rare, and the oracle never messaging an immobilized
// participant.
void criterion_directional(Check& check) {
  const corpus::Corpus corpus = corpus::load_corpus_file(LLM4TS_DATA_DIR "/corpus_seed.json");
  harness::ExperimentGrid grid;
  grid.methods = {harness::method_from_name("ts"), harness::method_from_name("llm4ts-oracle")};
  grid.repeats = 200;
  grid.base_seed = 424242;
  const auto results = harness::run_experiment(grid, corpus, 2);

  for (const auto& row : results.rows) {
    if (row.method != "llm4ts-oracle") continue;
    for (const auto& s : row.result.steps) {
      if (!s.padded && s.action != 0 && s.w == 0) {
        check.expect(false, "oracle executed a message while w=0 (seed " +
                                std::to_string(row.seed) + ")");
        return;
      }
    }
  }

  struct Cell {
    double ts_median = 0.0, oracle_median = 0.0;
  };
  std::map<std::pair<int, double>, Cell> cells;
  for (const auto& agg : harness::aggregate(results)) {
    Cell& c = cells[{agg.scenario_id, agg.eta_d}];
    if (agg.method == "ts") c.ts_median = agg.median_excess_steps;
    if (agg.method == "llm4ts-oracle") c.oracle_median = agg.median_excess_steps;
  }

  // (a) absolute ordering and eta ordering in the p_w11 = 0.7 scenarios
  for (int id : {1, 2}) {
    for (double eta : {0.05, 0.4}) {
      const Cell& c = cells.at({id, eta});
      check.expect(c.oracle_median > c.ts_median,
                   "scenario " + std::to_string(id) + " eta " + fmt_g(eta) +
                       ": oracle median " + fmt_g(c.oracle_median) + " <= ts median " +
                       fmt_g(c.ts_median));
    }
    const double gap_low = cells.at({id, 0.05}).oracle_median - cells.at({id, 0.05}).ts_median;
    const double gap_high = cells.at({id, 0.4}).oracle_median - cells.at({id, 0.4}).ts_median;
    check.expect(gap_high > gap_low, "scenario " + std::to_string(id) +
                                         ": eta=0.4 gap " + fmt_g(gap_high) +
                                         " not larger than eta=0.05 gap " + fmt_g(gap_low));
  }

  // (b) relative gaps shrink when the can't-walk state is rare
  auto rel_gap = [&](int id, double eta) {
    const Cell& c = cells.at({id, eta});
    return (c.oracle_median - c.ts_median) / std::max(std::abs(c.ts_median), 1e-9);
  };
  for (double eta : {0.05, 0.4}) {
    check.expect(rel_gap(3, eta) < rel_gap(1, eta),
                 "eta " + fmt_g(eta) + ": scenario 3 relative gap " + fmt_g(rel_gap(3, eta)) +
                     " not below scenario 1's " + fmt_g(rel_gap(1, eta)));
    check.expect(rel_gap(4, eta) < rel_gap(2, eta),
                 "eta " + fmt_g(eta) + ": scenario 4 relative gap " + fmt_g(rel_gap(4, eta)) +
                     " not below scenario 2's " + fmt_g(rel_gap(2, eta)));
  }
}

// --------------------------------------------------------------------------
// 6. Pipeline equivalence: always-allow filtering is exactly a no-op.
void criterion_pipeline_equivalence(Check& check) {
  const corpus::Corpus corpus = corpus::load_corpus_file(LLM4TS_DATA_DIR "/corpus_seed.json");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    harness::TrialConfig with_judge;
    with_judge.seed = seed;
    with_judge.judge.kind = judge::JudgeKind::always_allow;
    harness::TrialConfig without = with_judge;
    without.judge_enabled = false;

    const auto a = harness::run_trial(with_judge, corpus);
    const auto b = harness::run_trial(without, corpus);
    bool same = a.steps.size() == b.steps.size() && a.total_reward == b.total_reward &&
                a.excess_steps == b.excess_steps;
    if (same) {
      for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const auto& x = a.steps[i];
        const auto& y = b.steps[i];
        if (!(x.candidate == y.candidate && x.action == y.action && x.reward == y.reward &&
              x.h == y.h && x.d == y.d && x.w == y.w && x.c == y.c &&
              x.description == y.description)) {
          same = false;
          break;
        }
      }
    }
    if (!same) {
      check.expect(false, "seed " + std::to_string(seed) + " diverged");
      return;
    }
  }
}

// --------------------------------------------------------------------------
// 7. Determinism of the full default experiment across runs and worker
// counts.
void criterion_determinism(Check& check) {
  const corpus::Corpus corpus = corpus::load_corpus_file(LLM4TS_DATA_DIR "/corpus_seed.json");
  harness::ExperimentGrid grid;
  grid.methods = {harness::method_from_name("ts"), harness::method_from_name("llm4ts-oracle")};
  grid.repeats = 5;
  grid.base_seed = 99;

  const std::string run1 = harness::results_csv(harness::run_experiment(grid, corpus, 1));
  const std::string run2 = harness::results_csv(harness::run_experiment(grid, corpus, 1));
  const std::string run8 = harness::results_csv(harness::run_experiment(grid, corpus, 8));
  check.expect(fnv1a64_hex(run1) == fnv1a64_hex(run2), "repeated runs differ");
  check.expect(fnv1a64_hex(run1) == fnv1a64_hex(run8), "jobs=8 differs from jobs=1");
}

// --------------------------------------------------------------------------
// 8. LLM plumbing against a local mock server: golden prompts for every
// preset, parse/retry/fallback behavior, and zero network traffic from the
// simulation-only criteria above.
void criterion_llm_plumbing(Check& check) {
  check.expect(llm::request_counter().load() == 0,
               "network requests were issued by simulation-only criteria");

  prompt::PromptContext ctx;
  ctx.description = "I twisted my ankle";
  ctx.history = {
      {1, 0.381, 0.165, 2, 0.1},
      {0, 0.431, 0.265, 2, 103.9},
      {1, 0.481, 0.238, 2, 0.1},
      {0, 0.531, 0.338, std::nullopt, std::nullopt},
  };
  for (const char* preset : {"BFQH", "BFQ", "BF"}) {
    const std::string rendered =
        prompt::render_prompt(prompt::preset(preset), ctx, prompt::default_template());
    const std::string golden = read_text_file(std::string(LLM4TS_GOLDEN_DIR) + "/prompt_" +
                                              to_lower(preset) + ".txt");
    check.expect(rendered == golden, std::string("golden mismatch for ") + preset);
  }
  // component sentinels: history only in BFQH, questions absent from BF
  const std::string bfqh =
      prompt::render_prompt(prompt::preset("BFQH"), ctx, prompt::default_template());
  const std::string bfq =
      prompt::render_prompt(prompt::preset("BFQ"), ctx, prompt::default_template());
  const std::string bf =
      prompt::render_prompt(prompt::preset("BF"), ctx, prompt::default_template());
  check.expect(bfqh.find("user data in json format") != std::string::npos, "BFQH lost H");
  check.expect(bfq.find("user data in json format") == std::string::npos, "BFQ kept H");
  check.expect(bf.find("answer the following questions") == std::string::npos, "BF kept Q");
  for (const std::string& text : {bfqh, bfq, bf}) {
    check.expect(text.find("the user reply was: \"I twisted my ankle\"") != std::string::npos,
                 "reply text missing");
    check.expect(text.find("Should the mobile health app send a message to the user?") !=
                     std::string::npos,
                 "final question missing");
  }

  // parse / retry / fallback against a scripted endpoint
  {
    testutil::MockServer server([](int hit, const httplib::Request&) {
      if (hit == 0) return std::make_pair(200, testutil::chat_body("FINAL ANSWER: NO"));
      if (hit <= 2) return std::make_pair(200, testutil::chat_body("mumble"));
      if (hit == 3) return std::make_pair(200, testutil::chat_body("FINAL ANSWER: YES"));
      return std::make_pair(200, testutil::chat_body("gibberish"));
    });
    llm::EndpointConfig cfg;
    cfg.base_url = server.base_url();
    cfg.model = "mock";
    cfg.backoff_ms = 1;
    llm::Client client(cfg);

    judge::JudgeRequest req;
    req.description = {0, "I twisted my ankle", corpus::WalkLabel::cannot_walk};
    req.context.description = req.description.text;

    judge::LlmJudge j1(client, {});
    const auto d1 = j1.decide(req);
    check.expect(d1.verdict == judge::Verdict::block && d1.retries == 0 &&
                     d1.parse_outcome == judge::ParseOutcome::marker,
                 "marker parse failed");

    judge::LlmJudgeParams p2;
    p2.retry_budget = 2;
    judge::LlmJudge j2(client, p2);
    const auto d2 = j2.decide(req);
    check.expect(d2.verdict == judge::Verdict::allow && d2.retries == 2,
                 "retry path failed (retries = " + std::to_string(d2.retries) + ")");

    judge::LlmJudgeParams p3;
    p3.retry_budget = 1;
    p3.fallback = judge::Verdict::allow;
    judge::LlmJudge j3(client, p3);
    const auto d3 = j3.decide(req);
    check.expect(d3.verdict == judge::Verdict::allow &&
                     d3.parse_outcome == judge::ParseOutcome::fallback_default,
                 "fallback path failed");
  }
}

}  // namespace

int main() {
  run_criterion("1. logged-trajectory replay of the dynamics", criterion_fig2_replay);
  run_criterion("2. posterior updates match the batch conjugate oracle",
                criterion_posterior_oracle);
  run_criterion("3. walk-chain occupancy matches the stationary law",
                criterion_walk_occupancy);
  run_criterion("4. judge validation metrics", criterion_judge_validation);
  run_criterion("5. directional grid comparison (200 seeds/cell)", criterion_directional);
  run_criterion("6. pipeline equivalence of always-allow filtering",
                criterion_pipeline_equivalence);
  run_criterion("7. experiment determinism across runs and jobs", criterion_determinism);
  run_criterion("8. llm plumbing against a local mock server", criterion_llm_plumbing);

  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
