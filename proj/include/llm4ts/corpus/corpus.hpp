#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "llm4ts/errors.hpp"
#include "llm4ts/rng.hpp"
#include "llm4ts/util.hpp"

namespace llm4ts::corpus {

enum class WalkLabel { can_walk, cannot_walk };

inline const char* label_name(WalkLabel l) {
  return l == WalkLabel::can_walk ? "can_walk" : "cannot_walk";
}

// Labeled pools of participant free-text state descriptions. Immutable after
// load; safe to share across concurrent trials.
struct Corpus {
  std::vector<std::string> can_walk;
  std::vector<std::string> cannot_walk;
  nlohmann::ordered_json provenance;  // generator model, date, prompts, ...

  const std::vector<std::string>& pool(WalkLabel l) const {
    return l == WalkLabel::can_walk ? can_walk : cannot_walk;
  }
};

// A participant-provided state description with its latent ground-truth
// label. The label is for evaluation only; it is never shown to the agent or
// rendered into prompts.
struct DescriptionEvent {
  int t = 0;
  std::string text;
  WalkLabel label = WalkLabel::can_walk;
};

inline void validate(const Corpus& c) {
  if (c.can_walk.empty()) throw ValidationError("corpus: can_walk pool is empty");
  if (c.cannot_walk.empty()) throw ValidationError("corpus: cannot_walk pool is empty");
  for (const auto& s : c.can_walk)
    if (trim(s).empty()) throw ValidationError("corpus: empty string in can_walk pool");
  for (const auto& s : c.cannot_walk)
    if (trim(s).empty()) throw ValidationError("corpus: empty string in cannot_walk pool");
  std::unordered_set<std::string> seen(c.can_walk.begin(), c.can_walk.end());
  for (const auto& s : c.cannot_walk) {
    if (seen.count(s))
      throw ValidationError("corpus: description appears under both labels: \"" + s + "\"");
  }
}

inline Corpus corpus_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("corpus: top-level value must be an object");
  Corpus c;
  if (!doc.contains("can_walk") || !doc["can_walk"].is_array())
    throw ParseError("corpus: missing \"can_walk\" array");
  if (!doc.contains("cannot_walk") || !doc["cannot_walk"].is_array())
    throw ParseError("corpus: missing \"cannot_walk\" array");
  for (const auto& v : doc["can_walk"]) {
    if (!v.is_string()) throw ParseError("corpus: can_walk entries must be strings");
    c.can_walk.push_back(v.get<std::string>());
  }
  for (const auto& v : doc["cannot_walk"]) {
    if (!v.is_string()) throw ParseError("corpus: cannot_walk entries must be strings");
    c.cannot_walk.push_back(v.get<std::string>());
  }
  if (doc.contains("provenance")) c.provenance = doc["provenance"];
  validate(c);
  return c;
}

inline Corpus load_corpus(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corpus: invalid JSON: ") + e.what());
  }
  return corpus_from_json(doc);
}

inline Corpus load_corpus_file(const std::filesystem::path& path) {
  return load_corpus(read_text_file(path));
}

inline std::string corpus_to_json(const Corpus& c) {
  nlohmann::ordered_json doc;
  doc["can_walk"] = c.can_walk;
  doc["cannot_walk"] = c.cannot_walk;
  if (!c.provenance.is_null()) doc["provenance"] = c.provenance;
  return doc.dump(2) + "\n";
}

inline const std::string& sample_pool(const std::vector<std::string>& pool, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

// Stochastic emission policy for the participant description stream.
// Transitions between walk states always emit a description matching the new
// state; staying able to walk emits with probability p_emit; staying unable
// to walk never emits (the previous description stays active).
inline std::optional<DescriptionEvent> emit_description(int w_prev, int w_new, Rng& rng,
                                                        double p_emit, const Corpus& corpus,
                                                        int t) {
  if (w_prev == 1 && w_new == 0)
    return DescriptionEvent{t, sample_pool(corpus.cannot_walk, rng), WalkLabel::cannot_walk};
  if (w_prev == 0 && w_new == 1)
    return DescriptionEvent{t, sample_pool(corpus.can_walk, rng), WalkLabel::can_walk};
  if (w_prev == 1 && w_new == 1) {
    if (std::bernoulli_distribution(p_emit)(rng))
      return DescriptionEvent{t, sample_pool(corpus.can_walk, rng), WalkLabel::can_walk};
    return std::nullopt;
  }
  return std::nullopt;  // staying in can't-walk
}

}  // namespace llm4ts::corpus
