#pragma once

namespace fvqa {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace fvqa
