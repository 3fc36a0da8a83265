#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sostime/prng.hpp"
#include "sostime/tdma.hpp"
#include "sostime/time.hpp"

namespace sostime {

/// Per-link latency bounds, loss probability and a dedicated PRNG stream.
/// Every delivered message transits in [d_min, d_max]; the jitter is
/// J = d_max - d_min and the induced remote-reading error is J/2 after
/// midpoint compensation.
struct LinkModel {
    DurationNs d_min_ns = 0;
    DurationNs d_max_ns = 0;
    std::uint64_t loss_threshold_2p53 = 0; ///< quantized loss probability

    DurationNs jitter_ns() const { return d_max_ns - d_min_ns; }
    DurationNs midpoint_ns() const { return d_min_ns + jitter_ns() / 2; }
};

/// Draws for one message: loss verdict and, if delivered, the transit time.
/// Deterministic per (link stream, message sequence number).
struct LinkDraw {
    bool lost;
    DurationNs delay_ns;
};

inline LinkDraw draw_link(const LinkModel& link, RngStream& stream)
{
    bool lost = stream.chance(link.loss_threshold_2p53);
    DurationNs d = stream.next_in(link.d_min_ns, link.d_max_ns);
    return {lost, d};
}

// ---------------------------------------------------------------------------
// Message payloads

struct SyncReading {
    std::int64_t round = 0;
    LocalNs sender_reading = 0; ///< sender's global-time reading at send
};

struct ExtTimeReply {
    GlobalNs served_time = 0; ///< server's (bounded-error) view of reference time
};

struct LifeSign {
    std::int64_t emission_index = 0;
};

struct SlotData {
    int slot = -1;
    std::int64_t payload = 0;
};

struct TxnMessage {
    std::string txn_id;
    std::string origin;
    std::int64_t sparse_interval = 0;
    std::uint64_t origin_seq = 0;
    std::string account;
    std::int64_t amount = 0;
};

struct ObservationShare {
    std::uint64_t event_id = 0;
    GlobalNs observed_ts = 0;
};

struct Babble {
    std::uint64_t burst = 0;
};

struct AppData {
    std::string tag;
    std::int64_t value = 0;
};

using Payload = std::variant<SyncReading, ExtTimeReply, LifeSign, SlotData, TxnMessage,
                             ObservationShare, Babble, TimedOutput, AppData>;

struct Message {
    std::uint64_t id = 0;
    std::string src;
    std::string dst; ///< empty for shared-medium broadcast
    GlobalNs send_ts_global = 0;
    Payload payload;
};

// ---------------------------------------------------------------------------
// Fault injection

enum class FaultKind { crash, babbling, clock_drift_step, clock_freeze };

/// Outside its window a fault has no effect; faults are first-class because
/// their occurrence is the normal case in an SoS, not the exception.
struct FaultInjection {
    std::string target;
    FaultKind kind = FaultKind::crash;
    RefNs from_ns = 0;
    RefNs until_ns = 0; ///< exclusive
    Ppb drift_delta_ppb = 0;      ///< clock_drift_step only
    DurationNs babble_period_ns = 0; ///< babbling only

    bool active_at(RefNs t) const { return t >= from_ns && t < until_ns; }
};

inline const char* fault_kind_name(FaultKind k)
{
    switch (k) {
    case FaultKind::crash: return "crash";
    case FaultKind::babbling: return "babbling";
    case FaultKind::clock_drift_step: return "clock_drift_step";
    case FaultKind::clock_freeze: return "clock_freeze";
    }
    return "?";
}

} // namespace sostime
