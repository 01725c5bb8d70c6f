#pragma once

namespace hdprof {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace hdprof
