#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "sostime/time.hpp"

namespace sostime {

/// Single-threaded discrete-event core over the reference timeline.
///
/// Events at equal instants pop in insertion order (a monotone sequence
/// number breaks ties), so a run is a deterministic function of what was
/// scheduled. Reference time never moves backwards.
class EventQueue {
public:
    using Handler = std::function<void()>;

    void schedule(RefNs at, Handler fn)
    {
        if (at < now_)
            throw std::logic_error("event scheduled in the past");
        heap_.push({at, next_seq_++, std::move(fn)});
    }

    RefNs now() const { return now_; }
    bool empty() const { return heap_.empty(); }
    std::size_t pending() const { return heap_.size(); }

    /// Run events in order until the horizon (inclusive). Events scheduled
    /// past the horizon stay unexecuted.
    void run_until(RefNs horizon)
    {
        while (!heap_.empty() && heap_.top().at <= horizon) {
            Entry e = heap_.top();
            heap_.pop();
            now_ = e.at;
            e.fn();
        }
        now_ = horizon;
    }

private:
    struct Entry {
        RefNs at;
        std::uint64_t seq;
        Handler fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const
        {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_seq_ = 0;
    RefNs now_ = 0;
};

} // namespace sostime
