#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llm4ts/errors.hpp"
#include "llm4ts/util.hpp"

namespace llm4ts::prompt {

// Toggleable prompt components: (B) behavioral-dynamics description,
// (F) participant free-text reply, (Q) intermediate reasoning questions,
// (H) trajectory history. F is mandatory in every shipped preset; a judge
// prompt without the state description is meaningless.
struct PromptComponents {
  bool b = true;
  bool f = true;
  bool q = true;
  bool h = true;
  int history_len = 4;  // max rendered records, current rewardless one included
  bool include_candidate = false;

  void validate() const {
    if (!f) throw ValidationError("prompt: the F component cannot be disabled");
    if (history_len < 1) throw ValidationError("prompt: history_len must be >= 1");
  }
};

inline PromptComponents preset(std::string_view name) {
  const std::string key = to_lower(name);
  PromptComponents p;
  if (key == "bfqh") {
    return p;
  } else if (key == "bfq") {
    p.h = false;
    return p;
  } else if (key == "bf") {
    p.h = false;
    p.q = false;
    return p;
  }
  throw ConfigError("unknown prompt preset: \"" + std::string(name) +
                    "\" (expected BFQH, BFQ or BF)");
}

inline std::string preset_name(const PromptComponents& p) {
  std::string s;
  if (p.b) s += 'B';
  if (p.f) s += 'F';
  if (p.q) s += 'Q';
  if (p.h) s += 'H';
  return s;
}

// One (state, action, reward) tuple for the history block. The current
// decision point is represented by a trailing record without action/reward.
struct HistoryRecord {
  int c = 0;
  double h = 0.0;
  double d = 0.0;
  std::optional<int> action;
  std::optional<double> reward;
};

struct PromptContext {
  std::string description;            // active participant reply
  std::vector<HistoryRecord> history; // newest last
  int candidate_action = 0;           // metadata; rendered only when toggled on
};

// Renders the history block in the same json-ish style the judge sees in
// production logs: H and D to three decimals, rewards trimmed.
inline std::string render_history_json(const std::vector<HistoryRecord>& records) {
  std::string out = "[";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const HistoryRecord& r = records[i];
    if (i) out += ", ";
    out += "{'C': " + std::to_string(r.c);
    out += ", 'H': " + fmt_trim(r.h, 3);
    out += ", 'D': " + fmt_trim(r.d, 3);
    if (r.action) out += ", 'action': " + std::to_string(*r.action);
    if (r.reward) out += ", 'reward': " + fmt_trim(*r.reward, 3);
    out += "}";
  }
  out += "]";
  return out;
}

inline const std::string& default_template() {
  static const std::string tmpl =
      "[B]\n"
      "A mobile health app can send a message to the user to encourage the user to walk.\n"
      "Sending a message causes the habituation level to increase. Not sending a message "
      "causes the habituation level to decrease. An incorrectly tailored message causes the "
      "disengagement risk to increase. A correctly tailored message causes the disengagement "
      "risk to decrease. If the user is sick, injured or cannot walk, then the mobile health "
      "app should not send a message.\n"
      "C is the user context, H is the user habituation level, D is user disengagement risk.\n"
      "C is an integer with value 0 (at home) or 1 (not at home), H is a real number in "
      "[0,1], D is a real number in [0,1].\n"
      "The message can be generic, tailored to context 0, or tailored to context 1.\n"
      "There are 4 possible actions for the mobile health app: 0 (do not send a message), 1 "
      "(send a generic message), 2 (send a message tailored to context 0), 3 (send a message "
      "tailored to context 1).\n"
      "[H]\n"
      "The latest and current user data in json format are: {history}.\n"
      "[F]\n"
      "This morning, when we asked the user how they felt, the user reply was: \"{user_reply}\".\n"
      "[Q]\n"
      "Given the user reply, answer the following questions:\n"
      "Provide the reason for sending a message, Provide the reason for not sending a "
      "message, Is there any risk to the user? Will the user disengage from the study?\n"
      "Is there some long term consequence?\n"
      "Given these answers, provide the final answer to this question:\n"
      "[FINAL]\n"
      "Should the mobile health app send a message to the user?\n";
  return tmpl;
}

inline constexpr const char* kAnswerFormatInstruction =
    "End your reply with 'FINAL ANSWER: YES' or 'FINAL ANSWER: NO'.";

namespace detail {

inline bool is_section_header(const std::string& line) {
  if (line.size() < 3 || line.front() != '[' || line.back() != ']') return false;
  for (std::size_t i = 1; i + 1 < line.size(); ++i) {
    const char c = line[i];
    if (!(c >= 'A' && c <= 'Z') && c != '_') return false;
  }
  return true;
}

inline std::map<std::string, std::string> parse_sections(const std::string& template_text) {
  std::map<std::string, std::string> sections;
  std::string current;
  std::size_t pos = 0;
  while (pos <= template_text.size()) {
    const std::size_t eol = template_text.find('\n', pos);
    const std::string line = template_text.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos);
    if (is_section_header(line)) {
      current = line.substr(1, line.size() - 2);
      sections[current];  // section may legitimately be empty
    } else if (!current.empty()) {
      sections[current] += line;
      sections[current] += '\n';
    } else if (!trim(line).empty()) {
      throw TemplateError("prompt template: text before the first [SECTION] header");
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return sections;
}

inline std::string substitute(const std::string& text, const PromptContext& ctx,
                              const PromptComponents& comps) {
  std::string out;
  out.reserve(text.size() + 256);
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const std::size_t close = text.find('}', open);
    if (close == std::string::npos) throw TemplateError("prompt template: unterminated '{'");
    const std::string key = text.substr(open + 1, close - open - 1);
    if (key == "history") {
      std::vector<HistoryRecord> view = ctx.history;
      if (static_cast<int>(view.size()) > comps.history_len)
        view.erase(view.begin(),
                   view.begin() + (view.size() - static_cast<std::size_t>(comps.history_len)));
      out += render_history_json(view);
    } else if (key == "user_reply") {
      out += ctx.description;
    } else if (key == "candidate_action") {
      out += std::to_string(ctx.candidate_action);
    } else {
      throw TemplateError("prompt template: unknown placeholder {" + key + "}");
    }
    pos = close + 1;
  }
  return out;
}

}  // namespace detail

// Assembles the judge prompt from the enabled components, in B, H, F, Q
// order, followed by the final question and the machine-readable answer
// instruction. Disabled components are omitted wholesale.
inline std::string render_prompt(const PromptComponents& comps, const PromptContext& ctx,
                                 const std::string& template_text) {
  comps.validate();
  const auto sections = detail::parse_sections(template_text);
  auto section = [&](const char* name) -> const std::string& {
    auto it = sections.find(name);
    if (it == sections.end())
      throw TemplateError(std::string("prompt template: missing [") + name + "] section");
    return it->second;
  };

  std::string out;
  if (comps.b) out += section("B");
  if (comps.h) out += section("H");
  if (comps.f) out += section("F");
  if (comps.include_candidate) {
    out += "The message under consideration is action " +
           std::to_string(ctx.candidate_action) + ".\n";
  }
  if (comps.q) out += section("Q");
  out += section("FINAL");
  out += kAnswerFormatInstruction;
  out += '\n';
  return detail::substitute(out, ctx, comps);
}

}  // namespace llm4ts::prompt
