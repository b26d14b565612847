#pragma once

namespace harq {

inline constexpr const char* tool_version = "1.0.0";

} // namespace harq
