#pragma once

namespace realitygen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace realitygen
