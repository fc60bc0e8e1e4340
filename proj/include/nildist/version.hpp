#pragma once

namespace nildist {

inline constexpr const char* kVersion = "nildist 0.1.0";

}  // namespace nildist
