#pragma once

namespace sfwm {

inline constexpr const char* kToolName = "sfwm";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace sfwm
