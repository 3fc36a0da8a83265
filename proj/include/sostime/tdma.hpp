#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sostime/time.hpp"

namespace sostime {

struct TdmaSlot {
    std::string owner;
    GlobalNs offset_ns = 0;   ///< within the round
    DurationNs duration_ns = 0;
};

/// Cyclic TDMA schedule: the progression of global time determines which CS
/// may send on the shared medium.
class TdmaSchedule {
public:
    TdmaSchedule() = default;
    TdmaSchedule(DurationNs round_ns, DurationNs guard_gap_ns, std::vector<TdmaSlot> slots)
        : round_(round_ns), guard_gap_(guard_gap_ns), slots_(std::move(slots))
    {
    }

    bool empty() const { return slots_.empty(); }
    DurationNs round_ns() const { return round_; }
    DurationNs guard_gap_ns() const { return guard_gap_; }
    const std::vector<TdmaSlot>& slots() const { return slots_; }

    /// Index of the slot containing global_ts, or -1 inside a gap.
    int slot_at(GlobalNs global_ts) const
    {
        GlobalNs pos = floor_mod(global_ts, round_);
        for (std::size_t i = 0; i < slots_.size(); ++i)
            if (pos >= slots_[i].offset_ns && pos < slots_[i].offset_ns + slots_[i].duration_ns)
                return static_cast<int>(i);
        return -1;
    }

    /// Owner of the slot containing global_ts, or "" inside a gap.
    std::string slot_owner(GlobalNs global_ts) const
    {
        int i = slot_at(global_ts);
        return i < 0 ? std::string{} : slots_[static_cast<std::size_t>(i)].owner;
    }

    /// Slot whose window, inflated by inflation_ns on both sides, contains
    /// global_ts; -1 if none. The schedule invariant keeps inflated windows
    /// pairwise disjoint, so the answer is unique. This is the guardian's
    /// admission test: a correct sender whose clock disagrees with the
    /// guardian's by up to the inflation is never falsely blocked.
    int admitted_slot(GlobalNs global_ts, DurationNs inflation_ns,
                      DurationNs tx_ns = 0) const
    {
        GlobalNs pos = floor_mod(global_ts, round_);
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            GlobalNs lo = slots_[i].offset_ns - inflation_ns;
            GlobalNs hi = slots_[i].offset_ns + slots_[i].duration_ns + inflation_ns;
            // cyclic wrap: test the position in the adjacent rounds too
            for (GlobalNs p : {pos - round_, pos, pos + round_})
                if (p >= lo && p < hi && p + tx_ns <= hi)
                    return static_cast<int>(i);
        }
        return -1;
    }

    /// First slot index owned by cs, or -1.
    int slot_of(const std::string& cs) const
    {
        for (std::size_t i = 0; i < slots_.size(); ++i)
            if (slots_[i].owner == cs)
                return static_cast<int>(i);
        return -1;
    }

    /// Start (global time) of the next occurrence of slot i at or after ts.
    GlobalNs next_slot_start(int i, GlobalNs from) const
    {
        const TdmaSlot& s = slots_[static_cast<std::size_t>(i)];
        GlobalNs base = floor_div(from - s.offset_ns, round_) * round_ + s.offset_ns;
        return base >= from ? base : base + round_;
    }

    /// Schedulability check under clock disagreement: every slot inflated by
    /// inflation_ns on both sides must stay inside the round layout without
    /// overlapping a neighbor, offsets must be granule-aligned, and a
    /// transmission (tx_ns) plus the inflation inset must fit in each slot.
    std::vector<std::string> validate(DurationNs inflation_ns, std::int64_t granularity_ns,
                                      DurationNs tx_ns) const
    {
        std::vector<std::string> errors;
        if (round_ <= 0)
            errors.push_back("tdma.round_ns must be positive");
        if (slots_.empty())
            errors.push_back("tdma.slots must be non-empty");
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            const TdmaSlot& s = slots_[i];
            std::string at = "tdma.slots[" + std::to_string(i) + "]";
            if (s.offset_ns < 0 || s.duration_ns <= 0 ||
                s.offset_ns + s.duration_ns > round_)
                errors.push_back(at + ": slot outside the round");
            if (granularity_ns > 0 && s.offset_ns % granularity_ns != 0)
                errors.push_back(at + ": offset not a multiple of the granularity");
            if (s.duration_ns < inflation_ns + tx_ns)
                errors.push_back(at + ": duration below inflation inset + tx time");
        }
        // pairwise disjointness of inflated windows, cyclically
        for (std::size_t i = 0; i < slots_.size(); ++i) {
            for (std::size_t j = i + 1; j < slots_.size(); ++j) {
                GlobalNs a0 = slots_[i].offset_ns - inflation_ns;
                GlobalNs a1 = slots_[i].offset_ns + slots_[i].duration_ns + inflation_ns;
                bool overlap = false;
                for (GlobalNs shift : {-round_, GlobalNs{0}, round_}) {
                    GlobalNs b0 = slots_[j].offset_ns - inflation_ns + shift;
                    GlobalNs b1 = slots_[j].offset_ns + slots_[j].duration_ns + inflation_ns + shift;
                    if (a0 < b1 && b0 < a1)
                        overlap = true;
                }
                if (overlap)
                    errors.push_back("tdma.slots[" + std::to_string(i) + "] and [" +
                                     std::to_string(j) +
                                     "] overlap after inflating by the design precision");
            }
        }
        return errors;
    }

private:
    DurationNs round_ = 0;
    DurationNs guard_gap_ = 0;
    std::vector<TdmaSlot> slots_;
};

/// A set-point message carrying the future global-time instant at which it
/// must be delivered to the actuator. Early arrivals wait; late arrivals
/// are rejected as deadline misses.
struct TimedOutput {
    std::int64_t set_point = 0;
    GlobalNs act_at_global = 0;
};

} // namespace sostime
