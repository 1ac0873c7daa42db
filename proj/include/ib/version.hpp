#pragma once

namespace ib {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ib
