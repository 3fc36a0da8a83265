#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sostime/time.hpp"

namespace sostime {

enum class SyncMode { none, internal, external, combined };

struct SyncConfig {
    DurationNs resync_interval_ns = 100'000'000; ///< R
    int max_faulty = 0;                          ///< f, arbitrary-faulty clocks tolerated
    DurationNs reading_error_ns = 0;             ///< epsilon, remote-reading error bound
    SyncMode mode = SyncMode::none;
    DurationNs collect_ns = 0;       ///< estimate collection window after a round boundary
                                     ///< (0 = R/2)
    bool rate_correction = false;    ///< amortize corrections instead of stepping

    DurationNs effective_collect_ns() const
    {
        return collect_ns > 0 ? collect_ns : resync_interval_ns / 2;
    }
};

/// Fault-tolerant midpoint (Welch–Lynch family).
///
/// Sorts the offset estimates, discards the f smallest and f largest, and
/// returns the midpoint of the surviving extremes, rounded toward zero.
/// With at most f arbitrary entries the result always lies within
/// [min, max] of the correct entries, which is what contains faulty clocks.
///
/// Requires estimates.size() >= 2f + 1; the caller skips the round (flagged
/// degraded) when losses leave fewer.
inline std::int64_t ft_midpoint(std::vector<std::int64_t> estimates, int f)
{
    if (f < 0)
        throw std::invalid_argument("f must be >= 0");
    if (estimates.size() < static_cast<std::size_t>(2 * f + 1))
        throw std::invalid_argument("ft_midpoint needs at least 2f+1 estimates");
    std::sort(estimates.begin(), estimates.end());
    std::int64_t lo = estimates[static_cast<std::size_t>(f)];
    std::int64_t hi = estimates[estimates.size() - 1 - static_cast<std::size_t>(f)];
    __int128 sum = static_cast<__int128>(lo) + hi;
    return static_cast<std::int64_t>(sum / 2); // truncation == round toward zero
}

/// A trusted external time server (GNSS-style): while up, the time it
/// serves is within accuracy_ns of the reference timeline.
struct TimeServer {
    DurationNs accuracy_ns = 100;

    struct UpWindow {
        RefNs from;
        RefNs until; ///< exclusive
    };
    /// Up/down schedule; empty means always up.
    std::vector<UpWindow> availability;

    bool up_at(RefNs t) const
    {
        if (availability.empty())
            return true;
        for (const UpWindow& w : availability)
            if (t >= w.from && t < w.until)
                return true;
        return false;
    }
};

} // namespace sostime
