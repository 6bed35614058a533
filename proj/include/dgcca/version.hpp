#pragma once

namespace dgcca {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dgcca
