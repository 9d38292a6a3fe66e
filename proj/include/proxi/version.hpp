#pragma once

namespace proxi {
inline constexpr const char* kVersion = "0.1.0";
}
