#pragma once

namespace llm4ts {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace llm4ts
