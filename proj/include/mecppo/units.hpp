#pragma once

#include <stdexcept>
#include <string>

// Canonical units used throughout the library: bits, seconds, Hz, Watts,
// Joules, cycles/second, cycles/bit. Config files may use Mb/MHz/GHz etc.;
// conversion happens once, on load.
namespace mecppo::units {

inline constexpr double bits_per_mb = 1e6;
inline constexpr double hz_per_mhz = 1e6;
inline constexpr double hz_per_ghz = 1e9;
// 1 GHz/Mb = 1e9 cycles / 1e6 bits
inline constexpr double cycles_per_bit_per_ghz_mb = 1e3;

inline double to_si(double value, const std::string& unit) {
  if (unit == "bits" || unit == "Hz" || unit == "W" || unit == "J" ||
      unit == "s" || unit == "m") {
    return value;
  }
  if (unit == "Mb") return value * bits_per_mb;
  if (unit == "MHz") return value * hz_per_mhz;
  if (unit == "GHz") return value * hz_per_ghz;
  if (unit == "GHz/Mb") return value * cycles_per_bit_per_ghz_mb;
  if (unit == "W/Hz") return value;
  throw std::invalid_argument("unknown unit tag: " + unit);
}

}  // namespace mecppo::units
