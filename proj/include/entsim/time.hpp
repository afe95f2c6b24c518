#pragma once

#include <cmath>
#include <cstdint>

namespace entsim {

// Simulation clock: integer picoseconds. int64 covers ~106 days, far beyond any
// run length here, and keeps event ordering exact (no float comparison ties).
using TimePs = std::int64_t;

inline constexpr double kPsPerSecond = 1e12;

inline TimePs to_ps(double seconds) {
    return static_cast<TimePs>(std::llround(seconds * kPsPerSecond));
}

inline constexpr double to_seconds(TimePs t) {
    return static_cast<double>(t) / kPsPerSecond;
}

} // namespace entsim
