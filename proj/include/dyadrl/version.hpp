#pragma once

namespace dyadrl {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace dyadrl
