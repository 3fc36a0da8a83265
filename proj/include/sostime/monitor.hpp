#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sostime/time.hpp"

namespace sostime {

// ---------------------------------------------------------------------------
// Temporal validity of observations

struct Observation {
    std::string entity;
    std::int64_t value = 0;
    GlobalNs obs_ts_global = 0;
    DurationNs validity_len_ns = 0; ///< depends on the dynamics of the entity
};

enum class Validity { valid, stale };

/// Valid strictly while now - obs_ts < validity_len. The boundary is strict;
/// near it, verdicts taken on different CSs may legitimately differ within
/// the precision band.
inline Validity check_validity(const Observation& obs, GlobalNs now_global)
{
    return (now_global - obs.obs_ts_global < obs.validity_len_ns) ? Validity::valid
                                                                  : Validity::stale;
}

// ---------------------------------------------------------------------------
// Sparse-timestamped transactions

struct Transaction {
    std::string id;          ///< globally unique; equal ids are duplicates
    std::string origin;      ///< originating CS
    std::int64_t sparse_interval = 0; ///< permitted-interval index of the start
    std::uint64_t origin_seq = 0;     ///< per-origin sequence number (tie break)
    std::string account;
    std::int64_t amount = 0; ///< signed delta applied to the account
};

struct OrderedTransactions {
    std::vector<Transaction> ordered; ///< deduplicated, totally ordered
    std::vector<std::string> integrity_errors;
};

/// Totally order a transaction multiset by (sparse timestamp, origin,
/// origin sequence) and drop duplicates by id — the global timestamp is what
/// makes a retried transaction idempotent. A duplicate id carrying a
/// different payload is an integrity error, not a retry.
/// Deterministic in the multiset: permutation-invariant by construction.
inline OrderedTransactions order_transactions(std::vector<Transaction> txns)
{
    // Total order: the payload fields break ties so replicas facing
    // conflicting duplicates still converge on one survivor.
    std::sort(txns.begin(), txns.end(), [](const Transaction& a, const Transaction& b) {
        return std::tie(a.sparse_interval, a.origin, a.origin_seq, a.id, a.account,
                        a.amount) < std::tie(b.sparse_interval, b.origin, b.origin_seq,
                                             b.id, b.account, b.amount);
    });
    OrderedTransactions out;
    std::map<std::string, const Transaction*> seen;
    for (const Transaction& t : txns) {
        auto [it, inserted] = seen.emplace(t.id, &t);
        if (inserted) {
            out.ordered.push_back(t);
        } else {
            const Transaction& first = *it->second;
            if (first.account != t.account || first.amount != t.amount ||
                first.origin != t.origin || first.sparse_interval != t.sparse_interval ||
                first.origin_seq != t.origin_seq)
                out.integrity_errors.push_back("duplicate id " + t.id +
                                               " with different payload");
        }
    }
    return out;
}

/// Apply an ordered transaction list to account balances.
inline std::map<std::string, std::int64_t>
apply_ledger(const std::vector<Transaction>& ordered,
             std::map<std::string, std::int64_t> balances)
{
    for (const Transaction& t : ordered)
        balances[t.account] += t.amount;
    return balances;
}

// ---------------------------------------------------------------------------
// Replay-window filtering

/// Rejects replayed and stale messages using the global time carried in
/// every message. Seen ids are retained for window + precision_bound, after
/// which the stale rule alone rejects them.
class ReplayFilter {
public:
    ReplayFilter(DurationNs window_ns, DurationNs precision_bound_ns)
        : window_(window_ns), precision_bound_(precision_bound_ns)
    {
    }

    enum class Verdict { accept, reject_replay, reject_stale };

    Verdict check(const std::string& id, GlobalNs msg_ts_global, GlobalNs now_global)
    {
        evict_before(now_global - window_ - precision_bound_);
        if (now_global - msg_ts_global > window_ + precision_bound_)
            return Verdict::reject_stale;
        if (seen_.count(id))
            return Verdict::reject_replay;
        seen_.emplace(id, msg_ts_global);
        return Verdict::accept;
    }

    std::size_t seen_count() const { return seen_.size(); }

private:
    void evict_before(GlobalNs cutoff)
    {
        for (auto it = seen_.begin(); it != seen_.end();)
            it = (it->second < cutoff) ? seen_.erase(it) : std::next(it);
    }

    DurationNs window_;
    DurationNs precision_bound_;
    std::map<std::string, GlobalNs> seen_;
};

// ---------------------------------------------------------------------------
// Life-sign failure detection

struct LifesignConfig {
    DurationNs period_ns = 0;         ///< P, multiple of the round or sparse cycle
    DurationNs timeout_margin_ns = 0; ///< >= design precision + d_max
    int misses_to_fail = 1;           ///< consecutive missed deadlines before Failed
};

/// Deadline bookkeeping for one monitored producer. The emission series and
/// the deadline series are the same global-time series offset by the margin,
/// which is what minimizes the detection latency.
class LifesignMonitor {
public:
    explicit LifesignMonitor(LifesignConfig cfg) : cfg_(cfg) {}

    void record_arrival(std::int64_t emission_index) { received_.push_back(emission_index); }

    enum class Verdict { healthy, failed };

    /// Evaluate the deadline for emission k. Returns failed at the first
    /// deadline where the run of consecutive misses reaches the configured
    /// threshold.
    Verdict check_deadline(std::int64_t k)
    {
        bool got = std::find(received_.begin(), received_.end(), k) != received_.end();
        if (got)
            consecutive_misses_ = 0;
        else
            ++consecutive_misses_;
        return consecutive_misses_ >= cfg_.misses_to_fail ? Verdict::failed
                                                          : Verdict::healthy;
    }

    const LifesignConfig& config() const { return cfg_; }

private:
    LifesignConfig cfg_;
    std::vector<std::int64_t> received_;
    int consecutive_misses_ = 0;
};

// ---------------------------------------------------------------------------
// Merging per-CS event logs on the sparse global time

struct LogRecord {
    std::int64_t interval = 0; ///< sparse global timestamp
    std::string source;        ///< recording CS (tie break)
    std::uint64_t seq = 0;     ///< per-source sequence (tie break)
    std::string what;
};

/// Merge per-CS logs into one chronology ordered by (interval, source, seq).
/// Any two events whose true separation exceeds one sparse cycle appear in
/// true order — the blackout-report lesson, mechanized.
inline std::vector<LogRecord> merge_logs(const std::vector<std::vector<LogRecord>>& per_cs)
{
    std::vector<LogRecord> merged;
    for (const auto& log : per_cs)
        merged.insert(merged.end(), log.begin(), log.end());
    std::stable_sort(merged.begin(), merged.end(),
                     [](const LogRecord& a, const LogRecord& b) {
                         return std::tie(a.interval, a.source, a.seq) <
                                std::tie(b.interval, b.source, b.seq);
                     });
    return merged;
}

} // namespace sostime
