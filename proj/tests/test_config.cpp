#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "llm4ts/config.hpp"
#include "llm4ts/manifest.hpp"

using namespace llm4ts;

TEST_CASE("config documents round-trip through the resolver") {
  const auto doc = nlohmann::json::parse(R"({
    "sim": {"sigma_ctx": 0.5, "eta_d": 0.4, "horizon": 25},
    "ts": {"include_bias": true, "sigma_y2": 100.0},
    "judge": {"kind": "noisy", "p_false_block": 0.119},
    "prompt": {"preset": "BFQ", "history_len": 6},
    "endpoint": {"base_url": "http://localhost:9999", "model": "m", "temperature": 0.3},
    "corpus": {"file": "x.json", "p_emit": 0.25}
  })");
  const config::AppConfig cfg = config::config_from_json(doc);
  CHECK(cfg.sim.sigma_ctx == 0.5);
  CHECK(cfg.sim.eta_d == 0.4);
  CHECK(cfg.sim.horizon == 25);
  CHECK(cfg.sim.delta_h == 0.1);  // untouched defaults survive
  CHECK(cfg.ts.include_bias);
  CHECK(cfg.ts.sigma_y2 == 100.0);
  CHECK(cfg.judge.kind == judge::JudgeKind::noisy);
  CHECK(cfg.judge.noisy.p_false_block == 0.119);
  CHECK(cfg.prompt_preset == "BFQ");
  CHECK_FALSE(cfg.prompt.h);
  CHECK(cfg.prompt.history_len == 6);
  CHECK(cfg.endpoint.base_url == "http://localhost:9999");
  CHECK(cfg.endpoint.temperature == 0.3);
  CHECK(cfg.corpus_file == "x.json");
  CHECK(cfg.p_emit == 0.25);

  // snapshot and re-load gives the same resolved values
  const auto snapshot = config::config_to_json(cfg);
  const config::AppConfig again = config::config_from_json(snapshot);
  CHECK(again.sim.eta_d == cfg.sim.eta_d);
  CHECK(again.prompt_preset == cfg.prompt_preset);
  CHECK(again.endpoint.base_url == cfg.endpoint.base_url);
  CHECK(config::config_to_json(again) == snapshot);
}

TEST_CASE("unknown keys and bad values are config errors") {
  CHECK_THROWS_AS(config::config_from_json(nlohmann::json::parse(R"({"simm": {}})")),
                  ConfigError);
  CHECK_THROWS_AS(
      config::config_from_json(nlohmann::json::parse(R"({"sim": {"sgima_ctx": 1}})")),
      ConfigError);
  CHECK_THROWS_AS(
      config::config_from_json(nlohmann::json::parse(R"({"sim": {"sigma_ctx": "big"}})")),
      ConfigError);
  CHECK_THROWS_AS(
      config::config_from_json(nlohmann::json::parse(R"({"judge": {"kind": "psychic"}})")),
      ConfigError);
  CHECK_THROWS_AS(
      config::config_from_json(nlohmann::json::parse(R"({"prompt": {"preset": "XYZ"}})")),
      ConfigError);
}

TEST_CASE("the api key never appears in config snapshots") {
  config::AppConfig cfg;
  cfg.endpoint.base_url = "http://localhost:1";
  cfg.endpoint.api_key = "sk-secret-value";
  cfg.endpoint.model = "m";
  const std::string snapshot = config::config_to_json(cfg).dump();
  CHECK(snapshot.find("sk-secret-value") == std::string::npos);
  CHECK(snapshot.find("api_key") == std::string::npos);
}

TEST_CASE("environment variables override endpoint settings") {
  config::AppConfig cfg;
  cfg.endpoint.base_url = "http://from-config:1";
  cfg.endpoint.model = "config-model";

  setenv("LLM4TS_BASE_URL", "http://from-env:2", 1);
  setenv("LLM4TS_MODEL", "env-model", 1);
  setenv("LLM4TS_API_KEY", "env-key", 1);
  config::apply_env_overrides(cfg.endpoint);
  unsetenv("LLM4TS_BASE_URL");
  unsetenv("LLM4TS_MODEL");
  unsetenv("LLM4TS_API_KEY");

  CHECK(cfg.endpoint.base_url == "http://from-env:2");
  CHECK(cfg.endpoint.model == "env-model");
  CHECK(cfg.endpoint.api_key == "env-key");
}

TEST_CASE("manifests round-trip") {
  RunManifest m;
  m.command = "simulate";
  m.created_utc = "2025-01-01T00:00:00Z";
  m.config = {{"sim", {{"eta_d", 0.4}}}};
  m.seeds = {{"seed", 7}};
  m.args = {{"judge", "oracle"}};
  m.corpus_checksum = "abc123";
  m.endpoint_model = "";
  m.outputs = {"trial.json"};

  const auto j = manifest_to_json(m);
  const RunManifest back = manifest_from_json(j);
  CHECK(back.command == "simulate");
  CHECK(back.seeds["seed"] == 7);
  CHECK(back.args["judge"] == "oracle");
  CHECK(back.corpus_checksum == "abc123");
  CHECK(back.outputs == std::vector<std::string>{"trial.json"});
  CHECK(back.tool_version == kVersion);
}

TEST_CASE("fnv1a checksums are stable") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("hello") == fnv1a64_hex("hello"));
  CHECK(fnv1a64_hex("hello") != fnv1a64_hex("hallo"));
}

TEST_CASE("number formatting helpers") {
  CHECK(fmt_trim(0.100, 3) == "0.1");
  CHECK(fmt_trim(103.9, 3) == "103.9");
  CHECK(fmt_trim(0.0, 3) == "0");
  CHECK(fmt_trim(0.2385, 3) == "0.238");  // three-decimal display rounding
  CHECK(fmt_fixed(0.2385, 3) == "0.238");
  CHECK(fmt_g(0.5) == "0.5");
  CHECK(fmt_g(1234567.25) == "1234567.25");
}
