#pragma once

namespace condmix {

inline constexpr const char* kToolName = "condmix";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace condmix
