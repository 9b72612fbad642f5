#pragma once

namespace ncsafe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ncsafe
