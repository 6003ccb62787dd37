#pragma once

namespace dislocore {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dislocore
