#pragma once

namespace deepiv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace deepiv
