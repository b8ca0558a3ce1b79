#pragma once

namespace qcrsim {

inline constexpr const char* version = "0.1.0";

}  // namespace qcrsim
