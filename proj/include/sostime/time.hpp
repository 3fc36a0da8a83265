#pragma once

#include <cstdint>
#include <limits>

namespace sostime {

/// All simulation time is 64-bit integer nanoseconds. Three aliases name the
/// three time bases that must not be confused:
///
///  - RefNs:    the omniscient reference timeline owned by the simulation
///              core. Ground truth; never derived from any local clock.
///  - LocalNs:  a reading of one constituent system's drifting local clock
///              (always a multiple of that clock's granularity).
///  - GlobalNs: the synchronized global time, i.e. a corrected local reading
///              interpreted as a coordinate on the shared SoS timeline.
using RefNs = std::int64_t;
using LocalNs = std::int64_t;
using GlobalNs = std::int64_t;
using DurationNs = std::int64_t;

/// Rates (drift, rate corrections) are integer parts-per-billion, so a
/// nominal clock advances ppb_scale fine units per 10^9 reference ns.
using Ppb = std::int64_t;
inline constexpr Ppb ppb_scale = 1'000'000'000;

inline constexpr RefNs ref_never = std::numeric_limits<std::int64_t>::max();

/// Floor division (rounds toward negative infinity, unlike C++ '/').
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

constexpr std::int64_t ceil_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) == (b < 0)))
        ++q;
    return q;
}

/// a mod b with the sign of b (a true cyclic position for schedules).
constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b)
{
    return a - floor_div(a, b) * b;
}

/// floor(a * b / c) computed exactly through a 128-bit intermediate.
/// Clock readings multiply ~10^9-scale rates by ~10^11-scale instants,
/// which overflows int64.
constexpr std::int64_t mul_div_floor(std::int64_t a, std::int64_t b, std::int64_t c)
{
    __int128 p = static_cast<__int128>(a) * b;
    __int128 q = p / c;
    if ((p % c != 0) && ((p < 0) != (c < 0)))
        --q;
    return static_cast<std::int64_t>(q);
}

/// ceil(a * b / c), 128-bit intermediate.
constexpr std::int64_t mul_div_ceil(std::int64_t a, std::int64_t b, std::int64_t c)
{
    __int128 p = static_cast<__int128>(a) * b;
    __int128 q = p / c;
    if ((p % c != 0) && ((p < 0) == (c < 0)))
        ++q;
    return static_cast<std::int64_t>(q);
}

/// Round a reading down to a multiple of the granule g (g >= 1).
constexpr std::int64_t floor_to_granule(std::int64_t value, std::int64_t g)
{
    return floor_div(value, g) * g;
}

constexpr std::int64_t ceil_to_granule(std::int64_t value, std::int64_t g)
{
    return ceil_div(value, g) * g;
}

} // namespace sostime
