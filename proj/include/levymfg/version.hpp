#pragma once

namespace levymfg {

inline constexpr const char* kVersion = "0.1.0";

}
