#pragma once

#include <cstdint>

namespace kinlab {

using StateId = std::int32_t;
using ObsId = std::int64_t;
using Action = std::int32_t;

inline constexpr StateId kNoState = -1;
// Sentinel "next state" for the reward paid on the last step.
inline constexpr StateId kTerminalState = -2;

}  // namespace kinlab
