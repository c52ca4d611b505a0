#pragma once

namespace upsilon {

inline constexpr char kVersion[] = "0.1.0";

}  // namespace upsilon
