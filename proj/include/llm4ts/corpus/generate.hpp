#pragma once

#include <functional>
#include <string>
#include <unordered_set>

#include "llm4ts/corpus/corpus.hpp"
#include "llm4ts/llm/client.hpp"
#include "llm4ts/util.hpp"
#include "llm4ts/version.hpp"

namespace llm4ts::corpus {

struct GenerationPrompts {
  std::string cannot_walk;
  std::string can_walk;
};

inline GenerationPrompts default_generation_prompts() {
  return {
      "Generate a short first-person sentence giving a reason why a person might not be able "
      "to go for a walk today. Reply with the sentence only, no quotes.",
      "Generate a short first-person sentence from a person saying they are feeling fine "
      "today. Reply with the sentence only, no quotes.",
  };
}

namespace detail {

// Strips whitespace and one layer of surrounding quotes from a completion.
inline std::string clean_description(const std::string& raw) {
  std::string s = trim(raw);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    s = trim(s.substr(1, s.size() - 2));
  }
  return s;
}

}  // namespace detail

// Collects n_per_label unique descriptions per pool by repeatedly prompting
// the endpoint, de-duplicating as it goes. Fills `out` incrementally so a
// caller can persist partial progress if an endpoint error interrupts the
// run. Throws GenerationStalled when stall_limit consecutive responses add
// nothing new to the pool being filled.
inline void generate_into(Corpus& out, const llm::Client& client, int n_per_label,
                          const GenerationPrompts& prompts, int stall_limit = 25,
                          const std::function<void(WalkLabel, int)>& progress = {}) {
  if (n_per_label < 1) throw ValidationError("generate_corpus: n_per_label must be >= 1");

  // One seen-set across both pools keeps the labels disjoint by construction.
  std::unordered_set<std::string> seen(out.can_walk.begin(), out.can_walk.end());
  seen.insert(out.cannot_walk.begin(), out.cannot_walk.end());

  auto fill = [&](WalkLabel label, std::vector<std::string>& pool, const std::string& prompt) {
    int stalled = 0;
    while (static_cast<int>(pool.size()) < n_per_label) {
      const llm::ChatResult res = client.chat_complete(std::nullopt, prompt);
      const std::string text = detail::clean_description(res.text);
      if (!text.empty() && seen.insert(text).second) {
        pool.push_back(text);
        stalled = 0;
        if (progress) progress(label, static_cast<int>(pool.size()));
      } else if (++stalled >= stall_limit) {
        throw GenerationStalled("corpus generation stalled for pool \"" +
                                std::string(label_name(label)) + "\" after " +
                                std::to_string(stall_limit) + " non-unique responses (" +
                                std::to_string(pool.size()) + "/" +
                                std::to_string(n_per_label) + " collected)");
      }
    }
  };

  fill(WalkLabel::cannot_walk, out.cannot_walk, prompts.cannot_walk);
  fill(WalkLabel::can_walk, out.can_walk, prompts.can_walk);

  out.provenance = nlohmann::ordered_json{
      {"generator_model", client.config().model},
      {"generated_utc", utc_timestamp()},
      {"tool_version", kVersion},
      {"n_per_label", n_per_label},
      {"prompts",
       {{"cannot_walk", prompts.cannot_walk}, {"can_walk", prompts.can_walk}}},
  };
}

inline Corpus generate_corpus(const llm::Client& client, int n_per_label,
                              const GenerationPrompts& prompts = default_generation_prompts(),
                              int stall_limit = 25) {
  Corpus out;
  generate_into(out, client, n_per_label, prompts, stall_limit);
  validate(out);
  return out;
}

}  // namespace llm4ts::corpus
