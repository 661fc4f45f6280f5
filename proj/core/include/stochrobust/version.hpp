#pragma once

namespace stochrobust {

inline constexpr const char* version = "0.1.0";

}  // namespace stochrobust
