#pragma once

namespace locasso {
inline constexpr const char* kVersion = "0.1.0";
}
