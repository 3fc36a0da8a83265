#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sostime/time.hpp"

namespace sostime {

/// Partition of the global timeline into an infinite sequence of permitted
/// and forbidden intervals. Cycle k occupies
/// [epoch + k*(pi+delta), epoch + k*(pi+delta) + pi) permitted (half-open),
/// the remainder of the cycle forbidden.
class SparseTimeBase {
public:
    SparseTimeBase(DurationNs permitted_ns, DurationNs forbidden_ns,
                   GlobalNs epoch_ns = 0, std::uint64_t base_id = 0)
        : permitted_(permitted_ns), forbidden_(forbidden_ns), epoch_(epoch_ns), id_(base_id)
    {
        if (permitted_ < 1 || forbidden_ < 1)
            throw std::invalid_argument("sparse intervals must be positive");
    }

    DurationNs permitted_ns() const { return permitted_; }
    DurationNs forbidden_ns() const { return forbidden_; }
    DurationNs cycle_ns() const { return permitted_ + forbidden_; }
    GlobalNs epoch_ns() const { return epoch_; }
    std::uint64_t id() const { return id_; }

    struct Classification {
        bool permitted;
        std::int64_t interval; ///< enclosing cycle index k
    };

    Classification classify(GlobalNs ts) const
    {
        if (ts < epoch_)
            throw std::invalid_argument("timestamp precedes sparse epoch");
        GlobalNs rel = ts - epoch_;
        std::int64_t k = rel / cycle_ns();
        return {rel % cycle_ns() < permitted_, k};
    }

    GlobalNs interval_start(std::int64_t k) const { return epoch_ + k * cycle_ns(); }

    /// Smallest ts' >= ts lying in a permitted interval. Controlled events
    /// are delayed to this instant before they act.
    GlobalNs next_permitted(GlobalNs ts) const
    {
        if (ts < epoch_)
            return epoch_;
        Classification c = classify(ts);
        return c.permitted ? ts : interval_start(c.interval + 1);
    }

    /// Cycle index whose start is nearest at or below ts.
    std::int64_t interval_at_or_below(GlobalNs ts) const
    {
        if (ts < epoch_)
            throw std::invalid_argument("timestamp precedes sparse epoch");
        return (ts - epoch_) / cycle_ns();
    }

    /// Permitted interval closest to ts. Readings of an event that truly
    /// happened inside a permitted interval may leak into a neighboring
    /// forbidden zone by up to the clock disagreement; as long as the
    /// forbidden zone outlasts that disagreement, snapping to the nearest
    /// permitted interval recovers the same index on every clock. Ties snap
    /// to the earlier interval.
    std::int64_t nearest_interval(GlobalNs ts) const
    {
        if (ts < epoch_)
            throw std::invalid_argument("timestamp precedes sparse epoch");
        GlobalNs rel = (ts - epoch_) % cycle_ns();
        std::int64_t k = (ts - epoch_) / cycle_ns();
        if (rel < permitted_)
            return k;
        DurationNs below = rel - (permitted_ - 1); // to the last permitted ns
        DurationNs above = cycle_ns() - rel;       // to the next interval start
        return below <= above ? k : k + 1;
    }

private:
    DurationNs permitted_;
    DurationNs forbidden_;
    GlobalNs epoch_;
    std::uint64_t id_;
};

/// A sparse timestamp: the permitted-interval index an event was assigned
/// to, tagged with the identity of the time base that produced it.
struct SparseEvent {
    std::int64_t interval = 0;
    std::uint64_t base_id = 0;
    std::string source;
};

enum class SparseOrder { before, simultaneous, after };

/// Two sparse events in the same permitted interval happen simultaneously;
/// otherwise their interval indices order them. Indices are global, so
/// every CS evaluating this gets the same answer.
inline SparseOrder sparse_order(const SparseEvent& a, const SparseEvent& b)
{
    if (a.base_id != b.base_id)
        throw std::invalid_argument("sparse events from different time bases");
    if (a.interval == b.interval)
        return SparseOrder::simultaneous;
    return a.interval < b.interval ? SparseOrder::before : SparseOrder::after;
}

struct AgreementResult {
    enum class Status { agreed, conflicting_observations };
    Status status;
    std::int64_t interval = 0; ///< valid when status == agreed
};

/// Agreement protocol for events outside the sphere of control of any CS.
///
/// Deterministic function of the observation multiset: the lower-median
/// timestamp, mapped to the permitted interval whose start is nearest at or
/// below it. Everyone who evaluates the same multiset lands in the same
/// interval — temporal consistency at the expense of temporal fidelity.
/// Observations spreading wider than precision_bound + the coarsest granule
/// are flagged as conflicting (likely two distinct events).
inline AgreementResult agree_event(std::vector<GlobalNs> observations,
                                   const SparseTimeBase& base,
                                   DurationNs precision_bound_ns,
                                   std::int64_t coarsest_granule_ns = 1)
{
    if (observations.empty())
        throw std::invalid_argument("agreement needs at least one observation");
    std::sort(observations.begin(), observations.end());
    if (observations.back() - observations.front() > precision_bound_ns + coarsest_granule_ns)
        return {AgreementResult::Status::conflicting_observations, 0};
    GlobalNs median = observations[(observations.size() - 1) / 2];
    return {AgreementResult::Status::agreed, base.interval_at_or_below(median)};
}

} // namespace sostime
