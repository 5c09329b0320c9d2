#pragma once

namespace uwoc::constants {

inline constexpr double electron_charge = 1.602e-19;   // C
inline constexpr double planck = 6.626e-34;            // J s
inline constexpr double boltzmann = 1.380649e-23;      // J/K
inline constexpr double speed_of_light = 299792458.0;  // m/s, vacuum

}  // namespace uwoc::constants
