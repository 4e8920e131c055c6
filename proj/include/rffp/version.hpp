#pragma once
// Build identity echoed into reports and resolved configs.

namespace rffp {

inline constexpr const char* kVersion = "rffp 1.0.0";

}
