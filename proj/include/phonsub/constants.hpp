#pragma once

namespace phonsub::constants {

// Fixed physical constants of the build. The derived coupling figures are
// sensitive to these at the fourth significant digit, so they are pinned
// here rather than taken from any runtime source.
inline constexpr double speed_of_light = 2.998e8;    // m / s
inline constexpr double hbar = 1.054571817e-34;      // J s   (CODATA 2018)
inline constexpr double k_boltzmann = 1.380649e-23;  // J / K (exact SI)

inline constexpr double pi = 3.14159265358979323846;

}  // namespace phonsub::constants
