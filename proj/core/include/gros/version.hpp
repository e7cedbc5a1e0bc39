#pragma once

namespace gros {
inline constexpr const char* kToolVersion = "0.1.0";
}
