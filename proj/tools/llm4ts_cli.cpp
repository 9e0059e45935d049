// Command-line front end: single-trial simulation, experiment grids, judge
// validation, corpus generation and result reporting. Every command writes a
// manifest next to its outputs so runs can be reproduced exactly.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "llm4ts/config.hpp"
#include "llm4ts/corpus/generate.hpp"
#include "llm4ts/eval/metrics.hpp"
#include "llm4ts/harness/experiment.hpp"
#include "llm4ts/harness/report.hpp"
#include "llm4ts/harness/serialize.hpp"
#include "llm4ts/manifest.hpp"
#include "llm4ts/version.hpp"

namespace fs = std::filesystem;
using namespace llm4ts;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;

struct CommonFlags {
  std::string config_path;
  std::string from_manifest;
  std::string corpus_path;
  std::string base_url;
  std::string model;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_manifest = true) {
  cmd->add_option("--config", f.config_path, "config file (JSON)");
  if (with_manifest)
    cmd->add_option("--from-manifest", f.from_manifest,
                    "re-run with the resolved config recorded in a manifest");
  cmd->add_option("--corpus", f.corpus_path, "corpus file (overrides config)");
  cmd->add_option("--base-url", f.base_url, "inference endpoint base URL (overrides config)");
  cmd->add_option("--model", f.model, "inference model identifier (overrides config)");
}

// Resolution order: manifest config < config file < flags < env vars
// (endpoint only).
config::AppConfig resolve_config(const CommonFlags& f, RunManifest* manifest_out = nullptr) {
  config::AppConfig cfg;
  if (!f.from_manifest.empty()) {
    RunManifest m = load_manifest(f.from_manifest);
    cfg = config::config_from_json(m.config);
    if (manifest_out) *manifest_out = std::move(m);
  }
  if (!f.config_path.empty()) {
    if (!fs::exists(f.config_path))
      throw ConfigError("config file not found: " + f.config_path);
    cfg = config::load_config_file(f.config_path);
  }
  if (!f.corpus_path.empty()) cfg.corpus_file = f.corpus_path;
  if (!f.base_url.empty()) cfg.endpoint.base_url = f.base_url;
  if (!f.model.empty()) cfg.endpoint.model = f.model;
  config::apply_env_overrides(cfg.endpoint);
  return cfg;
}

corpus::Corpus load_corpus_checked(const config::AppConfig& cfg, std::string* checksum) {
  if (cfg.corpus_file.empty())
    throw ConfigError("no corpus configured (use --corpus or the corpus.file config key)");
  if (!fs::exists(cfg.corpus_file))
    throw ConfigError("corpus file not found: " + cfg.corpus_file);
  const std::string bytes = read_text_file(cfg.corpus_file);
  if (checksum) *checksum = fnv1a64_hex(bytes);
  return corpus::load_corpus(bytes);
}

std::optional<llm::Client> make_client_if_needed(const config::AppConfig& cfg,
                                                 judge::JudgeKind kind) {
  if (kind != judge::JudgeKind::llm) return std::nullopt;
  if (!cfg.endpoint.configured())
    throw ConfigError(
        "judge kind \"llm\" requires an endpoint (set endpoint.base_url and endpoint.model, "
        "or LLM4TS_BASE_URL / LLM4TS_MODEL)");
  return llm::Client(cfg.endpoint);
}

void warn_unused_prompt(bool prompt_given, judge::JudgeKind kind) {
  if (prompt_given && kind != judge::JudgeKind::llm)
    std::cerr << "warning: --prompt has no effect with the \"" << judge::kind_name(kind)
              << "\" judge; it only shapes llm prompts\n";
}

RunManifest base_manifest(const std::string& command, const config::AppConfig& cfg,
                          const std::string& corpus_checksum) {
  RunManifest m;
  m.command = command;
  m.created_utc = utc_timestamp();
  m.config = config::config_to_json(cfg);
  m.corpus_checksum = corpus_checksum;
  if (cfg.judge.kind == judge::JudgeKind::llm) m.endpoint_model = cfg.endpoint.model;
  return m;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  CommonFlags common;
  std::uint64_t seed = 0;
  std::string judge_kind;
  std::string prompt_preset;
  std::string out;
  bool jsonl = false;
};

int cmd_simulate(const SimulateArgs& a, bool judge_given, bool prompt_given, bool seed_given) {
  RunManifest prior;
  config::AppConfig cfg = resolve_config(a.common, &prior);

  std::uint64_t seed = a.seed;
  std::string judge_kind = a.judge_kind;
  std::string prompt_preset = a.prompt_preset;
  if (!a.common.from_manifest.empty()) {
    if (!seed_given && prior.seeds.contains("seed")) seed = prior.seeds["seed"].get<std::uint64_t>();
    if (!judge_given && prior.args.contains("judge"))
      judge_kind = prior.args["judge"].get<std::string>();
    if (!prompt_given && prior.args.contains("prompt"))
      prompt_preset = prior.args["prompt"].get<std::string>();
  }
  if (!judge_kind.empty()) cfg.judge.kind = judge::kind_from_string(judge_kind);
  if (!prompt_preset.empty()) {
    cfg.prompt_preset = prompt_preset;
    const int keep_len = cfg.prompt.history_len;
    cfg.prompt = prompt::preset(prompt_preset);
    cfg.prompt.history_len = keep_len;
  }
  warn_unused_prompt(prompt_given, cfg.judge.kind);

  std::string checksum;
  const corpus::Corpus corpus = load_corpus_checked(cfg, &checksum);
  const auto client = make_client_if_needed(cfg, cfg.judge.kind);

  harness::TrialConfig trial;
  trial.sim = cfg.sim;
  trial.ts = cfg.ts;
  trial.judge = cfg.judge;
  trial.prompt = cfg.prompt;
  trial.prompt_template = config::resolve_prompt_template(cfg);
  trial.p_emit = cfg.p_emit;
  trial.seed = seed;
  trial.method_label = std::string("judge:") + judge::kind_name(cfg.judge.kind);

  const harness::TrialResult result =
      harness::run_trial(trial, corpus, client ? &*client : nullptr);

  if (a.jsonl) {
    write_text_file(a.out, harness::steps_to_jsonl(result));
  } else {
    write_text_file(a.out, harness::trial_to_json(result).dump(2) + "\n");
  }

  RunManifest m = base_manifest("simulate", cfg, checksum);
  m.seeds = {{"seed", seed}};
  m.args = {{"judge", judge::kind_name(cfg.judge.kind)},
            {"prompt", cfg.prompt_preset},
            {"out", a.out},
            {"jsonl", a.jsonl}};
  m.outputs = {a.out};
  write_manifest(manifest_path_for(a.out), m);

  std::cout << "trial written to " << a.out << " (total_reward=" << fmt_g(result.total_reward)
            << ", excess_steps=" << fmt_g(result.excess_steps)
            << ", disengaged=" << (result.disengaged ? "yes" : "no") << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentArgs {
  CommonFlags common;
  std::vector<int> scenarios = {1, 2, 3, 4};
  std::vector<double> eta_d = {0.05, 0.4};
  std::vector<std::string> methods = {"ts", "llm4ts-oracle"};
  int repeats = 5;
  std::uint64_t base_seed = 0;
  std::string out_dir = "results";
  int jobs = 0;
  bool strict = false;
};

int cmd_experiment(const ExperimentArgs& a) {
  config::AppConfig cfg = resolve_config(a.common);

  harness::ExperimentGrid grid;
  grid.scenario_ids = a.scenarios;
  grid.eta_d_values = a.eta_d;
  grid.repeats = a.repeats;
  grid.base_seed = a.base_seed;
  grid.base_sim = cfg.sim;
  grid.ts = cfg.ts;
  grid.p_emit = cfg.p_emit;
  grid.prompt_template = config::resolve_prompt_template(cfg);

  bool needs_client = false;
  for (const std::string& name : a.methods) {
    harness::MethodSpec m = harness::method_from_name(name);
    m.prompt = cfg.prompt;
    if (m.judge.kind == judge::JudgeKind::noisy) m.judge.noisy = cfg.judge.noisy;
    if (m.judge.kind == judge::JudgeKind::llm) {
      m.judge.llm_retry_budget = cfg.judge.llm_retry_budget;
      m.judge.llm_fallback = cfg.judge.llm_fallback;
      m.judge.llm_memoize = cfg.judge.llm_memoize;
      needs_client = true;
    }
    grid.methods.push_back(std::move(m));
  }

  std::optional<llm::Client> client;
  if (needs_client) {
    if (!cfg.endpoint.configured())
      throw ConfigError("method llm4ts-llm requires an endpoint (endpoint.base_url/model or "
                        "LLM4TS_BASE_URL / LLM4TS_MODEL)");
    client.emplace(cfg.endpoint);
  }

  std::string checksum;
  const corpus::Corpus corpus = load_corpus_checked(cfg, &checksum);

  const int jobs = a.jobs > 0 ? a.jobs
                              : std::max(1u, std::thread::hardware_concurrency());
  const harness::ExperimentResults results =
      harness::run_experiment(grid, corpus, jobs, client ? &*client : nullptr);

  fs::create_directories(a.out_dir);
  const fs::path results_path = fs::path(a.out_dir) / "results.csv";
  const fs::path aggregate_path = fs::path(a.out_dir) / "aggregate.csv";
  write_text_file(results_path, harness::results_csv(results));
  write_text_file(aggregate_path, harness::aggregate_csv(results));

  RunManifest m = base_manifest("experiment", cfg, checksum);
  if (needs_client) m.endpoint_model = cfg.endpoint.model;
  m.seeds = {{"base_seed", a.base_seed}};
  m.args = {{"scenarios", a.scenarios}, {"eta_d", a.eta_d},   {"methods", a.methods},
            {"repeats", a.repeats},     {"jobs", jobs},       {"strict", a.strict},
            {"out", a.out_dir}};
  m.outputs = {results_path.string(), aggregate_path.string()};
  write_manifest(fs::path(a.out_dir) / "manifest.json", m);

  std::cout << "wrote " << results_path.string() << " and " << aggregate_path.string() << " ("
            << results.rows.size() << " trials";
  if (results.failures > 0) std::cout << ", " << results.failures << " failed";
  std::cout << ")\n";
  if (results.failures > 0) {
    std::cerr << "warning: " << results.failures
              << " llm-judge trials failed and were excluded from aggregates\n";
    if (a.strict) return kExitRuntime;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// validate-judge

struct ValidateArgs {
  CommonFlags common;
  std::string judge_kind = "oracle";
  int n = 500;
  std::string prompt_preset = "BFQ";
  std::string out;
  std::uint64_t seed = 0;
};

int cmd_validate_judge(const ValidateArgs& a, bool prompt_given) {
  config::AppConfig cfg = resolve_config(a.common);
  cfg.judge.kind = judge::kind_from_string(a.judge_kind);
  cfg.prompt_preset = a.prompt_preset;
  cfg.prompt = prompt::preset(a.prompt_preset);
  warn_unused_prompt(prompt_given, cfg.judge.kind);

  std::string checksum;
  const corpus::Corpus corpus = load_corpus_checked(cfg, &checksum);
  const auto client = make_client_if_needed(cfg, cfg.judge.kind);

  const auto the_judge =
      judge::make_judge(cfg.judge, derive_seed(a.seed, 4), client ? &*client : nullptr,
                        cfg.prompt, config::resolve_prompt_template(cfg));

  Rng rng(derive_seed(a.seed, 7));
  const eval::EvalMetrics metrics = eval::validate_judge(*the_judge, corpus, a.n, rng);

  std::cout << format_report(metrics);
  if (!a.out.empty()) {
    write_text_file(a.out, eval::metrics_to_json(metrics).dump(2) + "\n");
    RunManifest m = base_manifest("validate-judge", cfg, checksum);
    m.seeds = {{"seed", a.seed}};
    m.args = {{"judge", a.judge_kind}, {"n", a.n}, {"prompt", a.prompt_preset}, {"out", a.out}};
    m.outputs = {a.out};
    write_manifest(manifest_path_for(a.out), m);
    std::cout << "metrics written to " << a.out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gen-corpus

struct GenCorpusArgs {
  CommonFlags common;
  int n = 500;
  std::string out;
  bool force = false;
  int stall_limit = 25;
};

int cmd_gen_corpus(const GenCorpusArgs& a) {
  config::AppConfig cfg = resolve_config(a.common);
  if (!cfg.endpoint.configured())
    throw ConfigError("gen-corpus requires an endpoint (endpoint.base_url/model or "
                      "LLM4TS_BASE_URL / LLM4TS_MODEL)");
  if (fs::exists(a.out) && !a.force)
    throw ConfigError("output file exists: " + a.out + " (pass --force to overwrite)");

  const llm::Client client(cfg.endpoint);
  corpus::Corpus out;
  try {
    corpus::generate_into(out, client, a.n, corpus::default_generation_prompts(),
                          a.stall_limit, [](corpus::WalkLabel label, int count) {
                            std::cerr << "\r" << corpus::label_name(label) << ": " << count
                                      << std::flush;
                          });
    std::cerr << "\n";
  } catch (const Error& e) {
    std::cerr << "\nerror: " << e.what() << "\n";
    const std::string partial = a.out + ".partial.json";
    if (!out.can_walk.empty() || !out.cannot_walk.empty()) {
      write_text_file(partial, corpus::corpus_to_json(out));
      std::cerr << "partial progress saved to " << partial << "\n";
    }
    return kExitRuntime;
  }
  corpus::validate(out);
  const std::string text = corpus::corpus_to_json(out);
  write_text_file(a.out, text);

  RunManifest m = base_manifest("gen-corpus", cfg, fnv1a64_hex(text));
  m.endpoint_model = cfg.endpoint.model;
  m.args = {{"n", a.n}, {"out", a.out}, {"stall_limit", a.stall_limit}};
  m.outputs = {a.out};
  write_manifest(manifest_path_for(a.out), m);

  std::cout << "corpus written to " << a.out << " (" << out.can_walk.size() << " + "
            << out.cannot_walk.size() << " descriptions)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string in;
  std::string out_dir = "report";
  bool svg = false;
};

int cmd_report(const ReportArgs& a) {
  if (!fs::exists(a.in)) throw ConfigError("results file not found: " + a.in);
  const std::string text = read_text_file(a.in);
  const auto rows = harness::parse_results_csv(text);
  const auto cells = harness::summarize_report(rows);

  fs::create_directories(a.out_dir);
  const fs::path csv_path = fs::path(a.out_dir) / "report.csv";
  write_text_file(csv_path, harness::report_csv(cells));
  std::vector<std::string> outputs = {csv_path.string()};
  if (a.svg) {
    const fs::path svg_path = fs::path(a.out_dir) / "report.svg";
    write_text_file(svg_path, harness::report_svg(cells));
    outputs.push_back(svg_path.string());
  }

  RunManifest m;
  m.command = "report";
  m.created_utc = utc_timestamp();
  m.args = {{"in", a.in}, {"svg", a.svg}, {"out", a.out_dir}};
  m.corpus_checksum = fnv1a64_hex(text);
  m.outputs = outputs;
  write_manifest(fs::path(a.out_dir) / "manifest.json", m);

  std::cout << "report written to " << csv_path.string() << (a.svg ? " (+ report.svg)" : "")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive-intervention simulator and policy benchmark"};
  app.set_version_flag("--version", std::string("llm4ts ") + kVersion);
  app.require_subcommand(1);

  const std::vector<std::string> judge_kinds = {"always_allow", "oracle", "noisy", "llm"};
  const std::vector<std::string> presets = {"BFQH", "BFQ", "BF"};
  const std::vector<std::string> method_names = {"ts", "llm4ts-oracle", "llm4ts-noisy",
                                                 "llm4ts-llm"};

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "run one trial and write its step log");
  add_common(sim_cmd, sim_args.common);
  auto* sim_seed = sim_cmd->add_option("--seed", sim_args.seed, "trial seed");
  auto* sim_judge = sim_cmd->add_option("--judge", sim_args.judge_kind, "judge kind")
                        ->check(CLI::IsMember(judge_kinds));
  auto* sim_prompt = sim_cmd->add_option("--prompt", sim_args.prompt_preset, "prompt preset")
                         ->check(CLI::IsMember(presets));
  sim_cmd->add_option("--out", sim_args.out, "output trial log (JSON)")->required();
  sim_cmd->add_flag("--jsonl", sim_args.jsonl, "write line-delimited step records instead");

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand("experiment", "run a scenario grid and write CSVs");
  add_common(exp_cmd, exp_args.common, /*with_manifest=*/false);
  exp_cmd->add_option("--scenarios", exp_args.scenarios, "walk-chain scenario ids")
      ->delimiter(',')
      ->check(CLI::Range(1, 4));
  exp_cmd->add_option("--eta-d", exp_args.eta_d, "disengagement increment values")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  exp_cmd->add_option("--methods", exp_args.methods, "methods to compare")
      ->delimiter(',')
      ->check(CLI::IsMember(method_names));
  exp_cmd->add_option("--repeats", exp_args.repeats, "trials per cell")
      ->check(CLI::PositiveNumber);
  exp_cmd->add_option("--base-seed", exp_args.base_seed, "base seed for trial derivation");
  exp_cmd->add_option("--out", exp_args.out_dir, "output directory");
  exp_cmd->add_option("--jobs", exp_args.jobs, "worker threads (default: logical cores)");
  exp_cmd->add_flag("--strict", exp_args.strict, "fail the run if any llm trial fails");

  ValidateArgs val_args;
  auto* val_cmd = app.add_subcommand("validate-judge",
                                     "score a judge against a labeled corpus");
  add_common(val_cmd, val_args.common, /*with_manifest=*/false);
  val_cmd->add_option("--judge", val_args.judge_kind, "judge kind")
      ->check(CLI::IsMember(judge_kinds));
  val_cmd->add_option("--n", val_args.n, "samples per label")->check(CLI::PositiveNumber);
  auto* val_prompt = val_cmd->add_option("--prompt", val_args.prompt_preset, "prompt preset")
                         ->check(CLI::IsMember(presets));
  val_cmd->add_option("--out", val_args.out, "metrics output (JSON)");
  val_cmd->add_option("--seed", val_args.seed, "sampling seed");

  GenCorpusArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen-corpus",
                                     "generate a description corpus via the endpoint");
  add_common(gen_cmd, gen_args.common, /*with_manifest=*/false);
  gen_cmd->add_option("--n", gen_args.n, "descriptions per label")
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--out", gen_args.out, "output corpus file")->required();
  gen_cmd->add_flag("--force", gen_args.force, "overwrite an existing output file");
  gen_cmd->add_option("--stall-limit", gen_args.stall_limit,
                      "consecutive non-unique responses tolerated")
      ->check(CLI::PositiveNumber);

  ReportArgs rep_args;
  auto* rep_cmd = app.add_subcommand("report", "summarize a results CSV (plus optional SVG)");
  rep_cmd->add_option("--in", rep_args.in, "results.csv from an experiment run")->required();
  rep_cmd->add_option("--out", rep_args.out_dir, "output directory");
  rep_cmd->add_flag("--svg", rep_args.svg, "also write a bar chart SVG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim_cmd->parsed())
      return cmd_simulate(sim_args, sim_judge->count() > 0, sim_prompt->count() > 0,
                          sim_seed->count() > 0);
    if (exp_cmd->parsed()) return cmd_experiment(exp_args);
    if (val_cmd->parsed()) return cmd_validate_judge(val_args, val_prompt->count() > 0);
    if (gen_cmd->parsed()) return cmd_gen_corpus(gen_args);
    if (rep_cmd->parsed()) return cmd_report(rep_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
