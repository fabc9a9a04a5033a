#pragma once

namespace nkmart {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nkmart
