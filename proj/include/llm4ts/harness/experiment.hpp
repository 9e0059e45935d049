#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "llm4ts/harness/trial.hpp"
#include "llm4ts/util.hpp"

namespace llm4ts::harness {

// The four standard walk-chain scenarios, keyed 1-4.
inline std::pair<double, double> scenario_params(int id) {
  switch (id) {
    case 1: return {0.7, 0.5};
    case 2: return {0.7, 0.1};
    case 3: return {0.95, 0.5};
    case 4: return {0.95, 0.1};
  }
  throw ConfigError("unknown scenario id " + std::to_string(id) + " (valid: 1, 2, 3, 4)");
}

// One comparison arm: a judge selection plus prompt strategy under a label.
struct MethodSpec {
  std::string label;
  judge::JudgeSpec judge;
  bool judge_enabled = true;
  prompt::PromptComponents prompt;
};

inline MethodSpec method_from_name(const std::string& name) {
  MethodSpec m;
  m.label = name;
  if (name == "ts") {
    m.judge.kind = judge::JudgeKind::always_allow;
    return m;
  }
  if (name == "llm4ts-oracle") {
    m.judge.kind = judge::JudgeKind::oracle;
    return m;
  }
  if (name == "llm4ts-noisy") {
    m.judge.kind = judge::JudgeKind::noisy;
    return m;
  }
  if (name == "llm4ts-llm") {
    m.judge.kind = judge::JudgeKind::llm;
    return m;
  }
  throw ConfigError("unknown method \"" + name +
                    "\" (expected ts, llm4ts-oracle, llm4ts-noisy or llm4ts-llm)");
}

struct ExperimentGrid {
  std::vector<int> scenario_ids = {1, 2, 3, 4};
  std::vector<double> eta_d_values = {0.05, 0.4};
  std::vector<MethodSpec> methods;
  int repeats = 5;
  std::uint64_t base_seed = 0;
  sim::SimParams base_sim;  // scenario/eta knobs are overridden per cell
  ts::TsConfig ts;
  double p_emit = 0.3;
  std::string prompt_template;

  void validate() const {
    if (scenario_ids.empty()) throw ConfigError("experiment: no scenarios");
    for (int id : scenario_ids) scenario_params(id);
    if (eta_d_values.empty()) throw ConfigError("experiment: no eta_d values");
    if (methods.empty()) throw ConfigError("experiment: no methods");
    if (repeats < 1) throw ConfigError("experiment: repeats must be >= 1");
  }
};

struct TrialRow {
  int scenario_id = 0;
  double p_w11 = 0.0, p_w00 = 0.0, eta_d = 0.0;
  std::string method;
  std::uint64_t seed = 0;
  TrialResult result;
  bool failed = false;
  std::string error;
};

struct ExperimentResults {
  std::vector<TrialRow> rows;  // canonical order: scenario, eta, method, repeat
  long failures = 0;
};

// Every trial's seed is derived from (base seed, scenario id, eta index,
// method index, repeat), so cells are independent and results do not depend
// on execution order or the number of worker threads.
inline std::uint64_t trial_seed(std::uint64_t base_seed, int scenario_id, int eta_idx,
                                int method_idx, int repeat) {
  return derive_seed(base_seed, scenario_id, eta_idx, method_idx, repeat);
}

inline ExperimentResults run_experiment(const ExperimentGrid& grid,
                                        const corpus::Corpus& corpus, int jobs = 1,
                                        const llm::Client* client = nullptr) {
  grid.validate();
  struct Task {
    TrialConfig cfg;
    int scenario_id;
    int eta_idx;
    std::size_t slot;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < grid.scenario_ids.size(); ++s) {
    const int scenario_id = grid.scenario_ids[s];
    const auto [p_w11, p_w00] = scenario_params(scenario_id);
    for (std::size_t e = 0; e < grid.eta_d_values.size(); ++e) {
      for (std::size_t m = 0; m < grid.methods.size(); ++m) {
        const MethodSpec& method = grid.methods[m];
        for (int rep = 0; rep < grid.repeats; ++rep) {
          TrialConfig cfg;
          cfg.sim = grid.base_sim;
          cfg.sim.p_w11 = p_w11;
          cfg.sim.p_w00 = p_w00;
          cfg.sim.eta_d = grid.eta_d_values[e];
          cfg.ts = grid.ts;
          cfg.judge = method.judge;
          cfg.judge_enabled = method.judge_enabled;
          cfg.prompt = method.prompt;
          cfg.prompt_template = grid.prompt_template;
          cfg.p_emit = grid.p_emit;
          cfg.seed = trial_seed(grid.base_seed, scenario_id, static_cast<int>(e),
                                static_cast<int>(m), rep);
          cfg.method_label = method.label;
          tasks.push_back({std::move(cfg), scenario_id, static_cast<int>(e), tasks.size()});
        }
      }
    }
  }

  ExperimentResults results;
  results.rows.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  std::atomic<long> failures{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      TrialRow row;
      row.scenario_id = task.scenario_id;
      row.p_w11 = task.cfg.sim.p_w11;
      row.p_w00 = task.cfg.sim.p_w00;
      row.eta_d = task.cfg.sim.eta_d;
      row.method = task.cfg.method_label;
      row.seed = task.cfg.seed;
      try {
        row.result = run_trial(task.cfg, corpus, client);
      } catch (const EndpointError& e) {
        row.failed = true;
        row.error = e.what();
        failures.fetch_add(1);
      }
      results.rows[task.slot] = std::move(row);
    }
  };

  const int n_workers = std::max(1, jobs);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  results.failures = failures.load();
  return results;
}

// Quantiles by linear interpolation at rank q * (n - 1).
inline double quantile_linear(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw EmptyInput("quantile of empty list");
  if (sorted.size() == 1) return sorted[0];
  const double rank = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline std::tuple<double, double, double> aggregate_quantiles(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("aggregate_quantiles: empty input");
  std::sort(values.begin(), values.end());
  return {quantile_linear(values, 0.5), quantile_linear(values, 0.25),
          quantile_linear(values, 0.75)};
}

inline constexpr const char* kResultsCsvHeader =
    "scenario,p_w11,p_w00,eta_d,method,seed,total_reward,excess_steps,disengaged,"
    "disengage_t,msgs_sent,msgs_blocked,judge_calls,judge_fp,judge_fn,"
    "mean_judge_latency_ms";

inline std::string results_csv(const ExperimentResults& results) {
  std::string out = kResultsCsvHeader;
  out += '\n';
  for (const TrialRow& row : results.rows) {
    if (row.failed) continue;  // failures are reported separately
    const TrialResult& r = row.result;
    out += std::to_string(row.scenario_id);
    out += ',' + fmt_g(row.p_w11);
    out += ',' + fmt_g(row.p_w00);
    out += ',' + fmt_g(row.eta_d);
    out += ',' + row.method;
    out += ',' + std::to_string(row.seed);
    out += ',' + fmt_g(r.total_reward);
    out += ',' + fmt_g(r.excess_steps);
    out += ',' + std::string(r.disengaged ? "1" : "0");
    out += ',' + (r.disengage_t ? std::to_string(*r.disengage_t) : std::string());
    out += ',' + std::to_string(r.msgs_sent);
    out += ',' + std::to_string(r.msgs_blocked);
    out += ',' + std::to_string(r.judge_calls);
    out += ',' + std::to_string(r.judge_fp);
    out += ',' + std::to_string(r.judge_fn);
    out += ',' + fmt_g(r.mean_judge_latency_ms);
    out += '\n';
  }
  return out;
}

struct CellAggregate {
  int scenario_id = 0;
  double p_w11 = 0.0, p_w00 = 0.0, eta_d = 0.0;
  std::string method;
  long n = 0;
  double median_total_reward = 0.0, q25_total_reward = 0.0, q75_total_reward = 0.0;
  double median_excess_steps = 0.0, q25_excess_steps = 0.0, q75_excess_steps = 0.0;
  double disengage_rate = 0.0;
  double mean_judge_accuracy = 0.0;
  bool judge_accuracy_defined = false;
  double mean_judge_latency_ms = 0.0;
  double max_judge_latency_ms = 0.0;
};

inline std::vector<CellAggregate> aggregate(const ExperimentResults& results) {
  // rows are already in canonical cell-major order; group consecutive runs
  std::vector<CellAggregate> cells;
  std::size_t i = 0;
  while (i < results.rows.size()) {
    const TrialRow& first = results.rows[i];
    std::size_t j = i;
    std::vector<double> totals, excesses, accuracies;
    long n = 0, disengaged = 0;
    double lat_sum = 0.0, lat_max = 0.0;
    long lat_cells = 0;
    while (j < results.rows.size() && results.rows[j].scenario_id == first.scenario_id &&
           results.rows[j].eta_d == first.eta_d && results.rows[j].method == first.method) {
      const TrialRow& row = results.rows[j];
      ++j;
      if (row.failed) continue;
      const TrialResult& r = row.result;
      ++n;
      totals.push_back(r.total_reward);
      excesses.push_back(r.excess_steps);
      if (r.disengaged) ++disengaged;
      if (r.judge_calls > 0) {
        accuracies.push_back(static_cast<double>(r.judge_tp + r.judge_tn) /
                             static_cast<double>(r.judge_calls));
        lat_sum += r.mean_judge_latency_ms;
        lat_max = std::max(lat_max, r.max_judge_latency_ms);
        ++lat_cells;
      }
    }
    if (n > 0) {
      CellAggregate c;
      c.scenario_id = first.scenario_id;
      c.p_w11 = first.p_w11;
      c.p_w00 = first.p_w00;
      c.eta_d = first.eta_d;
      c.method = first.method;
      c.n = n;
      std::tie(c.median_total_reward, c.q25_total_reward, c.q75_total_reward) =
          aggregate_quantiles(totals);
      std::tie(c.median_excess_steps, c.q25_excess_steps, c.q75_excess_steps) =
          aggregate_quantiles(excesses);
      c.disengage_rate = static_cast<double>(disengaged) / static_cast<double>(n);
      if (!accuracies.empty()) {
        c.judge_accuracy_defined = true;
        double sum = 0.0;
        for (double a : accuracies) sum += a;
        c.mean_judge_accuracy = sum / static_cast<double>(accuracies.size());
        c.mean_judge_latency_ms = lat_sum / static_cast<double>(lat_cells);
        c.max_judge_latency_ms = lat_max;
      }
      cells.push_back(std::move(c));
    }
    i = j;
  }
  return cells;
}

inline constexpr const char* kAggregateCsvHeader =
    "scenario,p_w11,p_w00,eta_d,method,n,median_total_reward,q25_total_reward,"
    "q75_total_reward,median_excess_steps,q25_excess_steps,q75_excess_steps,"
    "disengage_rate,mean_judge_accuracy,mean_judge_latency_ms,max_judge_latency_ms";

inline std::string aggregate_csv(const ExperimentResults& results) {
  std::string out = kAggregateCsvHeader;
  out += '\n';
  for (const CellAggregate& c : aggregate(results)) {
    out += std::to_string(c.scenario_id);
    out += ',' + fmt_g(c.p_w11);
    out += ',' + fmt_g(c.p_w00);
    out += ',' + fmt_g(c.eta_d);
    out += ',' + c.method;
    out += ',' + std::to_string(c.n);
    out += ',' + fmt_g(c.median_total_reward);
    out += ',' + fmt_g(c.q25_total_reward);
    out += ',' + fmt_g(c.q75_total_reward);
    out += ',' + fmt_g(c.median_excess_steps);
    out += ',' + fmt_g(c.q25_excess_steps);
    out += ',' + fmt_g(c.q75_excess_steps);
    out += ',' + fmt_g(c.disengage_rate);
    out += ',' + (c.judge_accuracy_defined ? fmt_g(c.mean_judge_accuracy) : std::string());
    out += ',' + fmt_g(c.mean_judge_latency_ms);
    out += ',' + fmt_g(c.max_judge_latency_ms);
    out += '\n';
  }
  return out;
}

}  // namespace llm4ts::harness
