#pragma once

namespace wcg {

inline constexpr const char* kVersion = "wcg 0.1.0";

}  // namespace wcg
