#pragma once

namespace fieldest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fieldest
