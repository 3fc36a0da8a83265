#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sostime/time.hpp"

namespace sostime {

struct ClockParams {
    Ppb drift_ppb = 0;            ///< oscillator drift rho, parts per billion
    std::int64_t granularity_ns = 1; ///< tick length g, >= 1
    LocalNs initial_offset_ns = 0;   ///< reading offset at reference epoch
};

/// A drifting local clock of one constituent system.
///
/// The reading is a pure function of the reference instant: within one
/// segment of its piecewise-linear history,
///
///     raw(t)  = raw0 + floor(rate_ppb * (t - t0) / 1e9)
///     read(t) = floor(raw(t) / g) * g
///
/// where rate_ppb = 1e9 + drift + rate_correction (0 while frozen). State
/// corrections, drift steps, freeze/unfreeze each append a segment, so
/// historical readings stay exact and repeated reads never mutate anything.
class LocalClock {
public:
    explicit LocalClock(const ClockParams& p = {})
        : granularity_(p.granularity_ns), drift_ppb_(p.drift_ppb)
    {
        if (granularity_ < 1)
            throw std::invalid_argument("clock granularity must be >= 1 ns");
        segments_.push_back({0, p.initial_offset_ns, ppb_scale + p.drift_ppb});
    }

    std::int64_t granularity() const { return granularity_; }
    Ppb drift_ppb() const { return drift_ppb_; }
    Ppb rate_correction_ppb() const { return rate_corr_ppb_; }
    bool frozen() const { return frozen_; }

    /// Structural version; bumped by every mutation. Pending local-time
    /// alarms key off this to detect that their precomputed reference
    /// crossing is stale.
    std::uint64_t version() const { return version_; }

    /// Fine-grained reading before granularity flooring.
    LocalNs raw_at(RefNs t) const
    {
        const Segment& s = segment_at(t);
        return s.raw_at_from + mul_div_floor(s.rate_ppb, t - s.from_ref, ppb_scale);
    }

    /// The visible reading: raw floored to a multiple of the granule.
    LocalNs read(RefNs t) const { return floor_to_granule(raw_at(t), granularity_); }

    /// Apply a state correction of delta_ns at reference instant t.
    void step(RefNs t, std::int64_t delta_ns)
    {
        LocalNs raw = raw_at(t);
        push_segment(t, raw + delta_ns, current_rate());
        step_instants_.push_back(t);
    }

    void set_drift(RefNs t, Ppb drift_ppb)
    {
        LocalNs raw = raw_at(t);
        drift_ppb_ = drift_ppb;
        push_segment(t, raw, current_rate());
    }

    void set_rate_correction(RefNs t, Ppb corr_ppb)
    {
        LocalNs raw = raw_at(t);
        rate_corr_ppb_ = corr_ppb;
        push_segment(t, raw, current_rate());
    }

    void freeze(RefNs t)
    {
        LocalNs raw = raw_at(t);
        frozen_ = true;
        push_segment(t, raw, 0);
    }

    void unfreeze(RefNs t)
    {
        LocalNs raw = raw_at(t);
        frozen_ = false;
        push_segment(t, raw, current_rate());
    }

    /// Earliest reference instant t >= from with read(t) >= reading, or
    /// ref_never while the clock is frozen below the target.
    RefNs next_ref_reaching(LocalNs reading, RefNs from) const
    {
        // read(t) >= reading  <=>  raw(t) >= ceil_to_granule(reading, g)
        const LocalNs target_raw = ceil_to_granule(reading, granularity_);
        std::size_t si = 0;
        while (si + 1 < segments_.size() && segments_[si + 1].from_ref <= from)
            ++si;
        for (; si < segments_.size(); ++si) {
            const Segment& s = segments_[si];
            const RefNs seg_end = si + 1 < segments_.size() ? segments_[si + 1].from_ref
                                                            : ref_never; // exclusive
            auto raw_here = [&](RefNs t) {
                return s.raw_at_from + mul_div_floor(s.rate_ppb, t - s.from_ref, ppb_scale);
            };
            RefNs start = std::max(from, s.from_ref);
            if (raw_here(start) >= target_raw)
                return start;
            if (s.rate_ppb <= 0)
                continue; // flat or frozen; a later segment may still get there
            // smallest dt with floor(rate*dt/1e9) >= target_raw - raw_at_from
            std::int64_t dt = mul_div_ceil(target_raw - s.raw_at_from, ppb_scale, s.rate_ppb);
            RefNs t = std::max(s.from_ref + dt, start);
            // Integer division can land one tick around the crossing; settle it.
            while (t < seg_end && raw_here(t) < target_raw)
                ++t;
            while (t > start && raw_here(t - 1) >= target_raw)
                --t;
            if (t < seg_end && raw_here(t) >= target_raw)
                return t;
        }
        return ref_never;
    }

    /// Reference instants at which state corrections were applied.
    const std::vector<RefNs>& correction_instants() const { return step_instants_; }

    /// Segment boundaries (any mutation) in (from, to].
    std::vector<RefNs> boundary_instants(RefNs from, RefNs to) const
    {
        std::vector<RefNs> out;
        for (const Segment& s : segments_)
            if (s.from_ref > from && s.from_ref <= to)
                out.push_back(s.from_ref);
        return out;
    }

    /// True if the clock's rate differs from nominal anywhere in [from, to].
    bool deviates_in(RefNs from, RefNs to) const
    {
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            RefNs seg_end = (i + 1 < segments_.size()) ? segments_[i + 1].from_ref : ref_never;
            if (segments_[i].from_ref <= to && seg_end > from &&
                segments_[i].rate_ppb != ppb_scale)
                return true;
        }
        return false;
    }

private:
    struct Segment {
        RefNs from_ref;
        LocalNs raw_at_from;
        Ppb rate_ppb; // fine units per 1e9 reference ns; 0 while frozen
    };

    Ppb current_rate() const
    {
        return frozen_ ? 0 : ppb_scale + drift_ppb_ + rate_corr_ppb_;
    }

    const Segment& segment_at(RefNs t) const
    {
        // Hot path: reads at or after the latest mutation.
        if (t >= segments_.back().from_ref)
            return segments_.back();
        auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](RefNs v, const Segment& s) { return v < s.from_ref; });
        if (it == segments_.begin())
            return segments_.front(); // before epoch: extrapolate first segment
        return *(it - 1);
    }

    void push_segment(RefNs t, LocalNs raw, Ppb rate)
    {
        if (t < segments_.back().from_ref)
            throw std::logic_error("clock mutation in the past");
        if (t == segments_.back().from_ref) {
            segments_.back().raw_at_from = raw;
            segments_.back().rate_ppb = rate;
        } else {
            segments_.push_back({t, raw, rate});
        }
        ++version_;
    }

    std::vector<Segment> segments_;
    std::int64_t granularity_;
    Ppb drift_ppb_ = 0;
    Ppb rate_corr_ppb_ = 0;
    bool frozen_ = false;
    std::vector<RefNs> step_instants_;
    std::uint64_t version_ = 0;
};

/// Measured precision of an ensemble over an interval of discourse:
/// the maximum pairwise reading difference, judged on the reference
/// timeline.
struct Precision {
    DurationNs pi_ns = 0;
    RefNs window_start = 0;
    RefNs window_end = 0;
};

/// Readings are piecewise linear, so the pairwise maximum is attained at
/// window endpoints and correction boundaries; those instants (and the ns
/// just before each boundary) are exactly the instants sampled. When any
/// clock deviates from nominal rate over a nonzero window the result is
/// clamped up to the coarsest granule: quantization makes finer claims
/// unmeasurable.
inline Precision measure_precision(std::span<const LocalClock* const> ensemble,
                                   RefNs start, RefNs end)
{
    if (ensemble.size() < 2)
        throw std::invalid_argument("precision needs an ensemble of >= 2 clocks");
    if (end < start)
        throw std::invalid_argument("empty measurement window");

    std::vector<RefNs> samples{start, end};
    for (const LocalClock* c : ensemble) {
        for (RefNs b : c->boundary_instants(start, end)) {
            samples.push_back(b);
            if (b - 1 >= start)
                samples.push_back(b - 1);
        }
    }
    std::sort(samples.begin(), samples.end());
    samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

    DurationNs pi = 0;
    for (RefNs t : samples) {
        LocalNs lo = ensemble[0]->read(t);
        LocalNs hi = lo;
        for (const LocalClock* c : ensemble) {
            LocalNs r = c->read(t);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        pi = std::max(pi, hi - lo);
    }

    if (end > start) {
        bool any_deviating = false;
        std::int64_t coarsest = 0;
        for (const LocalClock* c : ensemble) {
            any_deviating = any_deviating || c->deviates_in(start, end);
            coarsest = std::max(coarsest, c->granularity());
        }
        if (any_deviating)
            pi = std::max(pi, coarsest);
    }
    return {pi, start, end};
}

inline Precision measure_precision(const std::vector<const LocalClock*>& ensemble,
                                   RefNs start, RefNs end)
{
    return measure_precision(std::span<const LocalClock* const>(ensemble), start, end);
}

} // namespace sostime
