#pragma once

namespace qbo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qbo
