#pragma once

#include <cctype>
#include <string>
#include <string_view>

namespace llm4ts::prompt {

enum class Decision { allow, block, unparseable };

namespace detail {

inline bool iequal_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(text[pos + i])) !=
        std::toupper(static_cast<unsigned char>(word[i])))
      return false;
  }
  return true;
}

inline std::size_t rfind_ci(std::string_view text, std::string_view needle) {
  if (needle.empty() || text.size() < needle.size()) return std::string_view::npos;
  for (std::size_t pos = text.size() - needle.size() + 1; pos-- > 0;) {
    if (iequal_at(text, pos, needle)) return pos;
  }
  return std::string_view::npos;
}

}  // namespace detail

struct ParsedDecision {
  Decision decision = Decision::unparseable;
  bool via_marker = false;
};

// Extracts the judge verdict from a model response. Primary route: the last
// "FINAL ANSWER: YES|NO" marker (case-insensitive, tolerant of quotes and
// emphasis around the answer word). Fallback: the last standalone yes/no
// token within the final 200 characters.
inline ParsedDecision parse_decision_detailed(std::string_view text) {
  static constexpr std::string_view kMarker = "FINAL ANSWER";
  const std::size_t m = detail::rfind_ci(text, kMarker);
  if (m != std::string_view::npos) {
    std::size_t pos = m + kMarker.size();
    while (pos < text.size() &&
           (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ':' ||
            text[pos] == '*' || text[pos] == '\'' || text[pos] == '"' || text[pos] == '`'))
      ++pos;
    if (detail::iequal_at(text, pos, "YES")) return {Decision::allow, true};
    if (detail::iequal_at(text, pos, "NO")) return {Decision::block, true};
  }

  const std::size_t window_start = text.size() > 200 ? text.size() - 200 : 0;
  Decision last = Decision::unparseable;
  std::size_t i = window_start;
  while (i < text.size()) {
    if (std::isalpha(static_cast<unsigned char>(text[i]))) {
      std::size_t j = i;
      while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
      const std::size_t len = j - i;
      if (len == 3 && detail::iequal_at(text, i, "YES")) last = Decision::allow;
      if (len == 2 && detail::iequal_at(text, i, "NO")) last = Decision::block;
      i = j;
    } else {
      ++i;
    }
  }
  return {last, false};
}

inline Decision parse_decision(std::string_view text) {
  return parse_decision_detailed(text).decision;
}

}  // namespace llm4ts::prompt
