#pragma once

namespace biflab {
inline constexpr const char* kVersion = "0.1.0";
}
