#pragma once

namespace iamflood {
inline constexpr const char* kVersion = "0.1.0";
}
