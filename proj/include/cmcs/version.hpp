#pragma once

namespace cmcs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cmcs
