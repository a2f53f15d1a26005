#pragma once

namespace kbcrane {

inline constexpr const char *kVersion = "1.0.0";

} // namespace kbcrane
