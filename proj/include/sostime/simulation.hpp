#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sostime/builtin_scenarios.hpp"
#include "sostime/clock.hpp"
#include "sostime/event_queue.hpp"
#include "sostime/monitor.hpp"
#include "sostime/network.hpp"
#include "sostime/prng.hpp"
#include "sostime/scenario.hpp"
#include "sostime/sparse.hpp"
#include "sostime/sync.hpp"
#include "sostime/tdma.hpp"
#include "sostime/time.hpp"
#include "sostime/trace.hpp"

namespace sostime {

struct PrecisionWindow {
    RefNs from_ns = 0;
    RefNs to_ns = 0;
    DurationNs pi_ns = 0;
};

struct AccuracySample {
    RefNs ref_ns = 0;
    DurationNs max_abs_offset_ns = 0;
    bool server_up = false;
};

/// Everything a run measures, written to metrics.json. All values are
/// integers, strings or booleans assembled into ordered containers, so
/// serialization is byte-stable across re-runs.
struct Metrics {
    std::string scenario;
    std::uint64_t seed = 0;
    RefNs horizon_ns = 0;

    DurationNs sparse_permitted_ns = 0;
    DurationNs sparse_forbidden_ns = 0;
    DurationNs design_precision_ns = 0;

    std::vector<PrecisionWindow> precision_series;
    DurationNs max_pi_ns = -1;    ///< -1 = unmeasurable (fewer than 2 eligible clocks)
    RefNs steady_from_ns = 0;     ///< start of the steady-state region
    DurationNs steady_pi_ns = -1; ///< max window precision from steady_from on

    std::vector<AccuracySample> accuracy;
    DurationNs accuracy_max_up_ns = -1; ///< worst offset from reference while server up

    std::int64_t rounds_applied = 0;
    std::int64_t rounds_degraded = 0;
    std::int64_t ext_corrections = 0;
    std::int64_t ext_unavailable = 0;

    std::int64_t messages_sent = 0;
    std::int64_t messages_delivered = 0;
    std::int64_t messages_lost = 0;
    std::int64_t messages_dropped_crashed = 0;
    std::int64_t collisions = 0;
    std::int64_t collisions_outside_babbler_slot = 0;
    std::int64_t guardian_blocks = 0;
    std::int64_t deadline_misses = 0;

    json workload = json::object();
};

inline void to_json(json& j, const PrecisionWindow& w)
{
    j = json{{"from_ns", w.from_ns}, {"to_ns", w.to_ns}, {"pi_ns", w.pi_ns}};
}

inline void to_json(json& j, const AccuracySample& a)
{
    j = json{{"ref_ns", a.ref_ns},
             {"max_abs_offset_ns", a.max_abs_offset_ns},
             {"server_up", a.server_up}};
}

inline void to_json(json& j, const Metrics& m)
{
    j = json{{"scenario", m.scenario},
             {"seed", m.seed},
             {"horizon_ns", m.horizon_ns},
             {"sparse", json{{"permitted_ns", m.sparse_permitted_ns},
                             {"forbidden_ns", m.sparse_forbidden_ns},
                             {"cycle_ns", m.sparse_permitted_ns + m.sparse_forbidden_ns},
                             {"design_precision_ns", m.design_precision_ns}}},
             {"precision", json{{"series", m.precision_series},
                                {"max_pi_ns", m.max_pi_ns},
                                {"steady_from_ns", m.steady_from_ns},
                                {"steady_pi_ns", m.steady_pi_ns}}},
             {"accuracy", json{{"samples", m.accuracy},
                               {"max_while_up_ns", m.accuracy_max_up_ns}}},
             {"sync", json{{"rounds_applied", m.rounds_applied},
                           {"rounds_degraded", m.rounds_degraded},
                           {"ext_corrections", m.ext_corrections},
                           {"ext_unavailable", m.ext_unavailable}}},
             {"comms", json{{"sent", m.messages_sent},
                            {"delivered", m.messages_delivered},
                            {"lost", m.messages_lost},
                            {"dropped_crashed", m.messages_dropped_crashed},
                            {"collisions", m.collisions},
                            {"collisions_outside_babbler_slot",
                             m.collisions_outside_babbler_slot},
                            {"guardian_blocks", m.guardian_blocks},
                            {"deadline_misses", m.deadline_misses}}},
             {"workload", m.workload}};
}

inline const char* payload_kind_name(const Payload& p)
{
    struct Visitor {
        const char* operator()(const SyncReading&) const { return "sync_reading"; }
        const char* operator()(const ExtTimeReply&) const { return "ext_time"; }
        const char* operator()(const LifeSign&) const { return "lifesign"; }
        const char* operator()(const SlotData&) const { return "slot_data"; }
        const char* operator()(const TxnMessage&) const { return "txn"; }
        const char* operator()(const ObservationShare&) const { return "obs_share"; }
        const char* operator()(const Babble&) const { return "babble"; }
        const char* operator()(const TimedOutput&) const { return "timed_output"; }
        const char* operator()(const AppData&) const { return "app_data"; }
    };
    return std::visit(Visitor{}, p);
}

/// Deterministic discrete-event execution of one scenario: drifting clocks,
/// the sync subsystem, unicast links and the shared medium, fault windows
/// and the configured workload, all driven from a single reference-time
/// event queue. Identical (scenario, seed) pairs produce byte-identical
/// traces and metrics.
class Simulation {
public:
    Simulation(Scenario sc, std::uint64_t seed)
        : sc_(std::move(sc)), seed_(seed), base_(make_base(sc_))
    {
        std::vector<std::string> problems = validate(sc_);
        if (!problems.empty()) {
            std::string msg = "invalid scenario '" + sc_.name + "':";
            for (const std::string& p : problems)
                msg += "\n  " + p;
            throw std::invalid_argument(msg);
        }
        syncc_ = sc_.sync.config();
        if (sc_.tdma)
            sched_ = sc_.tdma->schedule();
        if (sc_.sync.external) {
            server_.accuracy_ns = sc_.sync.external->accuracy_ns;
            server_.availability = sc_.sync.external->availability;
        }
        nodes_.reserve(sc_.nodes.size());
        for (const NodeSpec& spec : sc_.nodes) {
            Node n;
            n.spec = spec;
            n.clock = LocalClock({spec.drift_ppb, spec.granularity_ns,
                                  spec.initial_offset_ns});
            if (spec.guardian == "own")
                n.guardian_clock = LocalClock({spec.guardian_drift_ppb, spec.granularity_ns,
                                               spec.guardian_initial_offset_ns});
            index_[spec.id] = static_cast<int>(nodes_.size());
            nodes_.push_back(std::move(n));
        }
        m_.scenario = sc_.name;
        m_.seed = seed_;
        m_.horizon_ns = sc_.horizon_ns;
        m_.sparse_permitted_ns = base_.permitted_ns();
        m_.sparse_forbidden_ns = base_.forbidden_ns();
        m_.design_precision_ns = sc_.sparse.design_precision_ns;
    }

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Route the event trace to a CSV file (call before run()).
    void enable_trace(const std::string& path) { trace_.open(path); }

    void run()
    {
        if (ran_)
            throw std::logic_error("a Simulation instance runs once");
        ran_ = true;
        setup_faults();
        setup_sync();
        setup_workload();
        q_.run_until(sc_.horizon_ns);
        finalize();
        trace_.close();
    }

    /// Write metrics.json (+ merged_log.csv for the log workload, and an
    /// echo of the effective configuration) into out_dir.
    void write_outputs(const std::string& out_dir) const
    {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        {
            std::ofstream f(fs::path(out_dir) / "metrics.json", std::ios::binary);
            json j = m_;
            f << j.dump(2) << '\n';
        }
        {
            std::ofstream f(fs::path(out_dir) / "scenario.json", std::ios::binary);
            f << serialize_scenario(sc_);
        }
        if (!wl_.merged_sync.empty()) {
            std::ofstream f(fs::path(out_dir) / "merged_log.csv", std::ios::binary);
            f << "interval,source,seq,what\n";
            for (const LogRecord& r : wl_.merged_sync)
                f << r.interval << ',' << r.source << ',' << r.seq << ',' << r.what << '\n';
        }
    }

    // -- inspection --------------------------------------------------------

    const Scenario& scenario() const { return sc_; }
    const Metrics& metrics() const { return m_; }
    const TraceWriter& trace() const { return trace_; }
    const SparseTimeBase& sparse_base() const { return base_; }
    RefNs now() const { return q_.now(); }

    const LocalClock& clock_of(const std::string& cs) const
    {
        return nodes_[node_index(cs)].clock;
    }

    /// Read one CS's synchronized clock at a reference instant.
    GlobalNs read_local(const std::string& cs, RefNs at) const
    {
        return nodes_[node_index(cs)].clock.read(at);
    }

    Precision measure(const std::vector<std::string>& ids, RefNs from, RefNs to) const
    {
        std::vector<const LocalClock*> ens;
        for (const std::string& id : ids)
            ens.push_back(&nodes_[node_index(id)].clock);
        return measure_precision(ens, from, to);
    }

private:
    // -- node model --------------------------------------------------------

    struct Node {
        NodeSpec spec;
        LocalClock clock;
        std::optional<LocalClock> guardian_clock;

        struct Alarm {
            LocalNs due = 0;
            std::uint64_t armed = 0;
            std::function<void(RefNs)> fn;
        };
        std::map<std::uint64_t, Alarm> alarms;

        std::map<std::int64_t, std::map<std::string, DurationNs>> estimates;
        std::map<std::int64_t, std::map<std::string, DurationNs>> guard_estimates;
        std::int64_t last_round_consumed = -1;
        std::vector<RefNs> round_apply_refs;

        std::uint64_t seq = 0; ///< per-node monotone sequence (txn / log numbering)
        std::vector<Transaction> txn_store;
        std::map<std::uint64_t, std::map<std::string, GlobalNs>> shares;
        std::optional<LifesignMonitor> lifesign;
        std::int64_t lifesign_arrivals = 0;
        std::optional<ReplayFilter> replay;
        std::vector<LogRecord> log_sync, log_free;
    };

    /// Clamped so construction survives a config that validate() is about
    /// to reject with real diagnostics.
    static SparseTimeBase make_base(const Scenario& sc)
    {
        std::int64_t g = std::max<std::int64_t>(sc.max_granularity(), 1);
        DurationNs p = std::max<DurationNs>(sc.sparse.effective_permitted(g), 1);
        DurationNs f = std::max<DurationNs>(sc.sparse.effective_forbidden(), 1);
        return SparseTimeBase(p, f, std::max<GlobalNs>(sc.sparse.epoch_ns, 0), 1);
    }

    int node_index(const std::string& cs) const
    {
        auto it = index_.find(cs);
        if (it == index_.end())
            throw std::out_of_range("unknown CS id: " + cs);
        return it->second;
    }

    bool crashed(int i, RefNs t) const
    {
        for (const FaultSpec& f : sc_.faults)
            if (f.kind == "crash" && f.target == nodes_[i].spec.id &&
                f.injection().active_at(t))
                return true;
        return false;
    }

    /// A node's clock cannot serve precision/accuracy measurement while a
    /// crash or clock fault is active, nor during the re-convergence grace
    /// after one ends (two resync rounds).
    bool node_faulty_in(int i, RefNs from, RefNs to) const
    {
        DurationNs grace = internal_sync_on() ? 2 * syncc_.resync_interval_ns : 0;
        for (const FaultSpec& f : sc_.faults) {
            if (f.target != nodes_[i].spec.id || f.kind == "babbling")
                continue;
            if (f.from_ns <= to && f.until_ns + grace > from)
                return true;
        }
        return false;
    }

    bool internal_sync_on() const
    {
        return syncc_.mode == SyncMode::internal || syncc_.mode == SyncMode::combined;
    }

    bool external_sync_on() const
    {
        return (syncc_.mode == SyncMode::external || syncc_.mode == SyncMode::combined) &&
               sc_.sync.external.has_value();
    }

    RngStream& stream(const std::string& key)
    {
        auto it = streams_.find(key);
        if (it == streams_.end())
            it = streams_.emplace(key, RngStream::derive(seed_, key)).first;
        return it->second;
    }

    // -- local-time alarms -------------------------------------------------

    std::uint64_t schedule_local(int i, LocalNs due, std::function<void(RefNs)> fn)
    {
        std::uint64_t id = next_alarm_id_++;
        nodes_[i].alarms.emplace(id, Node::Alarm{due, 0, std::move(fn)});
        arm_alarm(i, id);
        return id;
    }

    void arm_alarm(int i, std::uint64_t id)
    {
        Node::Alarm& a = nodes_[i].alarms.at(id);
        ++a.armed;
        RefNs at = nodes_[i].clock.next_ref_reaching(a.due, q_.now());
        if (at == ref_never)
            return; // parked (clock frozen); re-armed on the next clock change
        q_.schedule(at, [this, i, id, stamp = a.armed] { fire_alarm(i, id, stamp); });
    }

    void fire_alarm(int i, std::uint64_t id, std::uint64_t stamp)
    {
        auto it = nodes_[i].alarms.find(id);
        if (it == nodes_[i].alarms.end() || it->second.armed != stamp)
            return; // cancelled or re-armed since
        if (nodes_[i].clock.read(q_.now()) < it->second.due) {
            arm_alarm(i, id); // clock was corrected backwards after arming
            return;
        }
        auto fn = std::move(it->second.fn);
        nodes_[i].alarms.erase(it);
        fn(q_.now());
    }

    /// Every pending crossing was computed against the old clock history;
    /// recompute them all.
    void on_clock_changed(int i)
    {
        for (auto& [id, a] : nodes_[i].alarms)
            arm_alarm(i, id);
    }

    // -- messaging ---------------------------------------------------------

    void send_unicast(int src, const std::string& dst, Payload pl,
                      std::optional<GlobalNs> ts_override = std::nullopt)
    {
        RefNs now = q_.now();
        Message m;
        m.id = next_msg_id_++;
        m.src = nodes_[src].spec.id;
        m.dst = dst;
        m.send_ts_global = ts_override ? *ts_override : nodes_[src].clock.read(now);
        m.payload = std::move(pl);

        LinkSpec spec = sc_.link_between(m.src, dst);
        LinkDraw draw = draw_link(spec.model(), stream("link:" + m.src + ">" + dst));
        ++m_.messages_sent;
        trace_.row(now, m.src, "msg_send",
                   "id=" + std::to_string(m.id) + ";dst=" + dst +
                       ";kind=" + payload_kind_name(m.payload) +
                       ";delay=" + std::to_string(draw.delay_ns) +
                       ";lost=" + std::to_string(draw.lost ? 1 : 0));
        if (draw.lost) {
            ++m_.messages_lost;
            return;
        }
        int di = node_index(dst);
        q_.schedule(now + draw.delay_ns, [this, di, m = std::move(m)] { deliver(di, m); });
    }

    void send_sync_reading(int src, int dst, const SyncReading& r)
    {
        RefNs now = q_.now();
        Message m;
        m.id = next_msg_id_++;
        m.src = nodes_[src].spec.id;
        m.dst = nodes_[dst].spec.id;
        m.send_ts_global = r.sender_reading;
        m.payload = r;
        LinkDraw draw =
            draw_link(sc_.sync.link.model(), stream("sync:" + m.src + ">" + m.dst));
        ++m_.messages_sent;
        if (draw.lost) {
            ++m_.messages_lost;
            trace_.row(now, m.src, "sync_lost", "round=" + std::to_string(r.round) +
                                                    ";dst=" + m.dst);
            return;
        }
        q_.schedule(now + draw.delay_ns,
                    [this, di = dst, m = std::move(m), d = draw.delay_ns] {
                        deliver_sync(di, m, d);
                    });
    }

    /// Shared-medium broadcast. The guardian, if configured on the sender,
    /// admits or blocks the transmission; admitted frames occupy the medium
    /// for tx_time and corrupt (and are corrupted by) any overlapping frame.
    void send_medium(int src, Payload pl)
    {
        RefNs now = q_.now();
        const MediumSpec& med = *sc_.medium;
        Node& n = nodes_[src];
        GlobalNs own_ts = n.clock.read(now);

        if (n.spec.guardian != "none" && !sched_.empty()) {
            const LocalClock& gclock =
                n.spec.guardian == "own" ? *n.guardian_clock : n.clock;
            GlobalNs gts = gclock.read(now);
            int slot =
                sched_.admitted_slot(gts, sc_.sparse.design_precision_ns, med.tx_time_ns);
            bool ok = slot >= 0 && sched_.slots()[static_cast<std::size_t>(slot)].owner ==
                                       n.spec.id;
            if (!ok) {
                ++m_.guardian_blocks;
                trace_.row(now, n.spec.id, "guardian_block",
                           "gts=" + std::to_string(gts) +
                               ";kind=" + payload_kind_name(pl));
                return;
            }
        }

        std::uint64_t mid = next_msg_id_++;
        Message m;
        m.id = mid;
        m.src = n.spec.id;
        m.send_ts_global = own_ts;
        m.payload = std::move(pl);

        RefNs end = now + med.tx_time_ns;
        int true_slot = sched_.empty() ? -1 : sched_.slot_at(now);

        // prune finished transmissions, then mark overlaps
        std::vector<std::uint64_t> still;
        for (std::uint64_t aid : medium_active_) {
            Transmission& other = medium_txs_.at(aid);
            if (other.end_ns <= now)
                continue;
            still.push_back(aid);
            other.corrupted = true;
            record_collision(now, aid, mid);
        }
        bool corrupted = !still.empty();
        still.push_back(mid);
        medium_active_ = std::move(still);
        medium_txs_.emplace(mid, Transmission{now, end, corrupted});

        ++m_.messages_sent;
        trace_.row(now, m.src, "medium_send",
                   "id=" + std::to_string(mid) + ";kind=" + payload_kind_name(m.payload) +
                       ";slot=" + std::to_string(true_slot) +
                       ";end=" + std::to_string(end));

        // reception completes a full frame after the transmission ends
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (static_cast<int>(j) == src)
                continue;
            const std::string& dst = nodes_[j].spec.id;
            LinkDraw draw =
                draw_link(med.link.model(), stream("medium:" + m.src + ">" + dst));
            if (draw.lost) {
                ++m_.messages_lost;
                continue;
            }
            q_.schedule(end + draw.delay_ns, [this, j, m, mid] {
                const Transmission& tx = medium_txs_.at(mid);
                if (tx.corrupted) {
                    trace_.row(q_.now(), nodes_[j].spec.id, "recv_corrupted",
                               "id=" + std::to_string(mid));
                    return;
                }
                deliver(static_cast<int>(j), m);
            });
        }
    }

    void record_collision(RefNs now, std::uint64_t a, std::uint64_t b)
    {
        ++m_.collisions;
        int slot = sched_.empty() ? -1 : sched_.slot_at(now);
        bool inside_babbler_slot = false;
        if (slot >= 0) {
            const std::string& owner = sched_.slots()[static_cast<std::size_t>(slot)].owner;
            for (const FaultSpec& f : sc_.faults)
                if (f.kind == "babbling" && f.target == owner &&
                    f.injection().active_at(now))
                    inside_babbler_slot = true;
        }
        if (!inside_babbler_slot)
            ++m_.collisions_outside_babbler_slot;
        trace_.row(now, "*", "collision",
                   "a=" + std::to_string(a) + ";b=" + std::to_string(b) +
                       ";slot=" + std::to_string(slot));
    }

    void deliver(int dst, const Message& m)
    {
        RefNs now = q_.now();
        Node& n = nodes_[dst];
        if (crashed(dst, now)) {
            ++m_.messages_dropped_crashed;
            return;
        }
        ++m_.messages_delivered;
        trace_.row(now, n.spec.id, "msg_recv",
                   "id=" + std::to_string(m.id) + ";src=" + m.src +
                       ";kind=" + payload_kind_name(m.payload));
        std::visit(
            [&](const auto& pl) { handle(dst, m, pl); },
            m.payload);
    }

    // -- internal clock synchronization -------------------------------------

    void setup_sync()
    {
        if (internal_sync_on())
            for (std::size_t i = 0; i < nodes_.size(); ++i)
                schedule_round(static_cast<int>(i), 1);
        if (external_sync_on()) {
            accuracy_floor_ =
                2 * sc_.sync.external->period_ns + sc_.sync.external->link.d_max_ns;
            for (std::size_t i = 0; i < nodes_.size(); ++i)
                schedule_ext_poll(static_cast<int>(i), 1);
        }
    }

    void schedule_round(int i, std::int64_t k)
    {
        schedule_local(i, k * syncc_.resync_interval_ns,
                       [this, i, k](RefNs) { round_send(i, k); });
    }

    void round_send(int i, std::int64_t k)
    {
        RefNs now = q_.now();
        schedule_round(i, k + 1);
        if (crashed(i, now))
            return;
        Node& n = nodes_[i];
        GlobalNs my = n.clock.read(now);
        trace_.row(now, n.spec.id, "sync_send",
                   "round=" + std::to_string(k) + ";reading=" + std::to_string(my));
        for (std::size_t j = 0; j < nodes_.size(); ++j)
            if (static_cast<int>(j) != i)
                send_sync_reading(i, static_cast<int>(j), {k, my});
        if (n.guardian_clock)
            n.guard_estimates[k][n.spec.id] = my - n.guardian_clock->read(now);
        schedule_local(i, k * syncc_.resync_interval_ns + syncc_.effective_collect_ns(),
                       [this, i, k](RefNs) { round_apply(i, k); });
    }

    void deliver_sync(int dst, const Message& m, DurationNs delay)
    {
        RefNs now = q_.now();
        Node& n = nodes_[dst];
        if (crashed(dst, now)) {
            ++m_.messages_dropped_crashed;
            return;
        }
        ++m_.messages_delivered;
        const SyncReading& r = std::get<SyncReading>(m.payload);
        if (r.round <= n.last_round_consumed)
            return; // straggler from a round whose correction already ran
        DurationNs mid = sc_.sync.link.model().midpoint_ns();
        GlobalNs own = n.clock.read(now);
        DurationNs est = (r.sender_reading + mid) - own;
        n.estimates[r.round][m.src] = est;
        int si = node_index(m.src);
        DurationNs true_diff = nodes_[si].clock.read(now) - own;
        trace_.row(now, n.spec.id, "sync_recv",
                   "round=" + std::to_string(r.round) + ";peer=" + m.src +
                       ";est=" + std::to_string(est) + ";own=" + std::to_string(own) +
                       ";true_diff=" + std::to_string(true_diff) +
                       ";delay=" + std::to_string(delay));
        if (n.guardian_clock)
            n.guard_estimates[r.round][m.src] =
                (r.sender_reading + mid) - n.guardian_clock->read(now);
    }

    void round_apply(int i, std::int64_t k)
    {
        RefNs now = q_.now();
        Node& n = nodes_[i];
        n.last_round_consumed = std::max(n.last_round_consumed, k);
        auto est_it = n.estimates.find(k);
        if (crashed(i, now)) {
            if (est_it != n.estimates.end())
                n.estimates.erase(est_it);
            n.guard_estimates.erase(k);
            return;
        }

        std::vector<std::int64_t> est{0}; // own clock's estimate of itself
        if (est_it != n.estimates.end())
            for (const auto& [peer, e] : est_it->second)
                est.push_back(e);
        int quorum = 2 * syncc_.max_faulty + 1;
        if (static_cast<int>(est.size()) < quorum) {
            ++m_.rounds_degraded;
            trace_.row(now, n.spec.id, "sync_degraded",
                       "round=" + std::to_string(k) + ";n=" + std::to_string(est.size()));
        } else {
            // with a reachable time server the external reference is master:
            // the ensemble correction is computed (and reported) but withheld,
            // so the two control loops never fight over the same clock
            bool deferred =
                syncc_.mode == SyncMode::combined && server_.up_at(now);
            std::int64_t corr = ft_midpoint(est, syncc_.max_faulty);
            if (!deferred) {
                if (syncc_.rate_correction) {
                    Ppb corr_ppb =
                        mul_div_floor(corr, ppb_scale, syncc_.resync_interval_ns);
                    n.clock.set_rate_correction(now, corr_ppb);
                } else {
                    n.clock.step(now, corr);
                }
                on_clock_changed(i);
            }
            ++m_.rounds_applied;
            n.round_apply_refs.push_back(now);
            trace_.row(now, n.spec.id, "sync_round",
                       "round=" + std::to_string(k) + ";n=" + std::to_string(est.size()) +
                           ";corr=" + std::to_string(corr) +
                           ";pi=" + std::to_string(instantaneous_pi(now)) +
                           (deferred ? ";deferred=1" : ""));
            sample_accuracy(now);
        }
        if (est_it != n.estimates.end())
            n.estimates.erase(est_it);

        // the guardian synchronizes passively from the same readings
        auto g_it = n.guard_estimates.find(k);
        if (n.guardian_clock && g_it != n.guard_estimates.end()) {
            std::vector<std::int64_t> gest;
            for (const auto& [peer, e] : g_it->second)
                gest.push_back(e);
            if (static_cast<int>(gest.size()) >= quorum)
                n.guardian_clock->step(now, ft_midpoint(gest, syncc_.max_faulty));
        }
        if (g_it != n.guard_estimates.end())
            n.guard_estimates.erase(g_it);
    }

    DurationNs instantaneous_pi(RefNs t) const
    {
        LocalNs lo = 0, hi = 0;
        bool first = true;
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (node_faulty_in(static_cast<int>(j), t, t))
                continue;
            LocalNs r = nodes_[j].clock.read(t);
            if (first) {
                lo = hi = r;
                first = false;
            } else {
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
        return first ? -1 : hi - lo;
    }

    // -- external synchronization -------------------------------------------

    void schedule_ext_poll(int i, std::int64_t k)
    {
        schedule_local(i, k * sc_.sync.external->period_ns,
                       [this, i, k](RefNs) { ext_poll(i, k); });
    }

    void ext_poll(int i, std::int64_t k)
    {
        RefNs now = q_.now();
        schedule_ext_poll(i, k + 1);
        if (crashed(i, now))
            return;
        Node& n = nodes_[i];
        if (!server_.up_at(now)) {
            ++m_.ext_unavailable;
            trace_.row(now, n.spec.id, "ext_unavailable", "");
            sample_accuracy(now);
            return;
        }
        RngStream& st = stream("ext:" + n.spec.id);
        GlobalNs served = now + st.next_in(-server_.accuracy_ns, server_.accuracy_ns);
        LinkDraw draw = draw_link(sc_.sync.external->link.model(), st);
        ++m_.messages_sent;
        if (draw.lost) {
            ++m_.messages_lost;
            trace_.row(now, n.spec.id, "ext_lost", "");
            return;
        }
        q_.schedule(now + draw.delay_ns, [this, i, served, d = draw.delay_ns] {
            ext_apply(i, served, d);
        });
    }

    void ext_apply(int i, GlobalNs served, DurationNs delay)
    {
        RefNs now = q_.now();
        Node& n = nodes_[i];
        if (crashed(i, now)) {
            ++m_.messages_dropped_crashed;
            return;
        }
        ++m_.messages_delivered;
        DurationNs mid = sc_.sync.external->link.model().midpoint_ns();
        std::int64_t corr = (served + mid) - n.clock.read(now);
        n.clock.step(now, corr);
        on_clock_changed(i);
        ++m_.ext_corrections;
        trace_.row(now, n.spec.id, "ext_sync",
                   "served=" + std::to_string(served) + ";corr=" + std::to_string(corr) +
                       ";delay=" + std::to_string(delay));
        sample_accuracy(now);
    }

    void sample_accuracy(RefNs t)
    {
        if (!external_sync_on())
            return;
        DurationNs worst = -1;
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            if (node_faulty_in(static_cast<int>(j), t, t))
                continue;
            DurationNs off = nodes_[j].clock.read(t) - t;
            worst = std::max(worst, off < 0 ? -off : off);
        }
        if (worst < 0)
            return;
        bool up = server_.up_at(t);
        m_.accuracy.push_back({t, worst, up});
        // the headline figure describes steady state: samples before every
        // node has completed its first poll cycle carry the initial offsets
        if (up && t >= accuracy_floor_)
            m_.accuracy_max_up_ns = std::max(m_.accuracy_max_up_ns, worst);
    }

    // -- fault injection -----------------------------------------------------

    void setup_faults()
    {
        for (const FaultSpec& fs : sc_.faults) {
            int i = node_index(fs.target);
            if (fs.kind == "crash") {
                q_.schedule(fs.from_ns, [this, i, fs] {
                    if (wl_.crash_ref < 0)
                        wl_.crash_ref = q_.now();
                    trace_.row(q_.now(), nodes_[i].spec.id, "crash_start", "");
                });
                if (fs.until_ns < sc_.horizon_ns)
                    q_.schedule(fs.until_ns, [this, i] {
                        trace_.row(q_.now(), nodes_[i].spec.id, "crash_end", "");
                    });
            } else if (fs.kind == "babbling") {
                schedule_babble(i, fs, 0);
            } else if (fs.kind == "clock_drift_step") {
                q_.schedule(fs.from_ns, [this, i, fs] {
                    Node& n = nodes_[i];
                    n.clock.set_drift(q_.now(), n.spec.drift_ppb + fs.drift_delta_ppb);
                    on_clock_changed(i);
                    trace_.row(q_.now(), n.spec.id, "clock_fault_start",
                               "kind=drift_step;delta_ppb=" +
                                   std::to_string(fs.drift_delta_ppb));
                });
                if (fs.until_ns < sc_.horizon_ns)
                    q_.schedule(fs.until_ns, [this, i] {
                        Node& n = nodes_[i];
                        n.clock.set_drift(q_.now(), n.spec.drift_ppb);
                        on_clock_changed(i);
                        trace_.row(q_.now(), n.spec.id, "clock_fault_end", "kind=drift_step");
                    });
            } else if (fs.kind == "clock_freeze") {
                q_.schedule(fs.from_ns, [this, i] {
                    nodes_[i].clock.freeze(q_.now());
                    on_clock_changed(i);
                    trace_.row(q_.now(), nodes_[i].spec.id, "clock_fault_start",
                               "kind=freeze");
                });
                if (fs.until_ns < sc_.horizon_ns)
                    q_.schedule(fs.until_ns, [this, i] {
                        nodes_[i].clock.unfreeze(q_.now());
                        on_clock_changed(i);
                        trace_.row(q_.now(), nodes_[i].spec.id, "clock_fault_end",
                                   "kind=freeze");
                    });
            }
        }
    }

    void schedule_babble(int i, const FaultSpec& fs, std::uint64_t burst)
    {
        RefNs at = fs.from_ns + static_cast<RefNs>(burst) * fs.babble_period_ns;
        if (at >= fs.until_ns || at > sc_.horizon_ns)
            return;
        q_.schedule(at, [this, i, fs, burst] {
            schedule_babble(i, fs, burst + 1);
            if (crashed(i, q_.now()))
                return;
            trace_.row(q_.now(), nodes_[i].spec.id, "babble_attempt",
                       "burst=" + std::to_string(burst));
            send_medium(i, Babble{burst});
        });
    }

    // -- workloads -----------------------------------------------------------

    void setup_workload()
    {
        const std::string& kind = sc_.workload.kind;
        if (kind == "none")
            return;
        if (kind == "ski_race")
            setup_ski();
        else if (kind == "grid_snapshot")
            setup_grid();
        else if (kind == "txn_ledger")
            setup_txn();
        else if (kind == "robot_sync")
            setup_robot();
        else if (kind == "tdma_control_loop")
            setup_control_loop();
        else if (kind == "lifesign")
            setup_lifesign();
        else if (kind == "tdma_traffic")
            setup_tdma_traffic();
        else if (kind == "replay")
            setup_replay();
        else if (kind == "log_merge")
            setup_log_merge();
    }

    // An uncontrolled external event observed by several CSs: each records
    // its own reading, shares it, and all run the same agreement function.
    void setup_ski()
    {
        const json& p = sc_.workload.params;
        RefNs start = p.at("start_at_ns").get<RefNs>();
        DurationNs dur = p.at("duration_ns").get<DurationNs>();
        DurationNs wait = p.value("exchange_wait_ns", DurationNs{100'000'000});
        std::vector<std::string> start_obs = p.at("start_observers");
        std::vector<std::string> finish_obs = p.at("finish_observers");

        wl_.ski_start_ref = start;
        wl_.ski_finish_ref = start + dur;
        q_.schedule(start, [this, start_obs, wait] { observe_event(1, start_obs, wait); });
        q_.schedule(start + dur,
                    [this, finish_obs, wait] { observe_event(2, finish_obs, wait); });
    }

    void observe_event(std::uint64_t event_id, const std::vector<std::string>& observers,
                       DurationNs wait)
    {
        RefNs now = q_.now();
        for (const std::string& id : observers) {
            int i = node_index(id);
            if (crashed(i, now))
                continue;
            Node& n = nodes_[i];
            GlobalNs ts = n.clock.read(now);
            n.shares[event_id][id] = ts;
            trace_.row(now, id, "event_observed",
                       "event=" + std::to_string(event_id) + ";ts=" + std::to_string(ts));
            for (const std::string& peer : observers)
                if (peer != id)
                    send_unicast(i, peer, ObservationShare{event_id, ts});
            schedule_local(i, ts + wait, [this, i, event_id](RefNs) {
                agree_on_event(i, event_id);
            });
        }
    }

    void agree_on_event(int i, std::uint64_t event_id)
    {
        Node& n = nodes_[i];
        std::vector<GlobalNs> values;
        for (const auto& [peer, ts] : n.shares[event_id])
            values.push_back(ts);
        AgreementResult r =
            agree_event(values, base_, sc_.sparse.design_precision_ns, sc_.max_granularity());
        bool ok = r.status == AgreementResult::Status::agreed;
        trace_.row(q_.now(), n.spec.id, "agree",
                   "event=" + std::to_string(event_id) +
                       ";status=" + (ok ? "agreed" : "conflicting") +
                       ";interval=" + std::to_string(ok ? r.interval : -1) +
                       ";n=" + std::to_string(values.size()));
        wl_.agreements.push_back({event_id, n.spec.id, ok, ok ? r.interval : -1});
    }

    void handle(int dst, const Message& m, const ObservationShare& s)
    {
        nodes_[dst].shares[s.event_id][m.src] = s.observed_ts;
    }

    // Simultaneous distributed snapshot at one agreed global instant.
    void setup_grid()
    {
        const json& p = sc_.workload.params;
        GlobalNs at = p.at("sample_at_global_ns").get<GlobalNs>();
        DurationNs validity = p.at("validity_ns").get<DurationNs>();
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            schedule_local(static_cast<int>(i), at, [this, i, at](RefNs now) {
                wl_.grid_samples[nodes_[i].spec.id] = now;
                trace_.row(now, nodes_[i].spec.id, "sample",
                           "at=" + std::to_string(at) +
                               ";ts=" + std::to_string(nodes_[i].clock.read(now)));
            });
        }
        if (p.contains("probe_after_ns"))
            for (const json& pr : p.at("probe_after_ns")) {
                DurationNs probe = pr.get<DurationNs>();
                q_.schedule(at + probe, [this, at, probe, validity] {
                    Observation obs{"snapshot", 0, at, validity};
                    GlobalNs now_g = nodes_[0].clock.read(q_.now());
                    bool valid = check_validity(obs, now_g) == Validity::valid;
                    trace_.row(q_.now(), nodes_[0].spec.id, "validity_check",
                               "probe=" + std::to_string(probe) +
                                   ";verdict=" + (valid ? "valid" : "stale"));
                    wl_.grid_checks.emplace_back(probe, valid);
                });
            }
    }

    // Sparse-timestamped transactions submitted to every replica, with
    // deliberate duplicate deliveries.
    void setup_txn()
    {
        const json& p = sc_.workload.params;
        std::vector<std::string> clients = p.at("clients");
        wl_.txn_replicas = p.at("replicas").get<std::vector<std::string>>();
        wl_.txn_accounts = p.at("accounts").get<std::vector<std::string>>();
        wl_.txn_initial_balance = p.value("initial_balance", std::int64_t{0});
        GlobalNs from = p.at("submit_from_ns").get<GlobalNs>();
        GlobalNs until = p.at("submit_until_ns").get<GlobalNs>();
        std::int64_t per_client = p.at("txns_per_client").get<std::int64_t>();
        std::uint64_t dup_q = RngStream::quantize_probability(p.value("duplicate_prob", 0.0));
        std::int64_t max_amount = p.value("max_amount", std::int64_t{100});

        for (const std::string& c : clients) {
            int ci = node_index(c);
            RngStream& st = stream("wl:txn:" + c);
            std::vector<GlobalNs> at;
            for (std::int64_t k = 0; k < per_client; ++k)
                at.push_back(st.next_in(from, until));
            std::sort(at.begin(), at.end());
            for (GlobalNs t : at) {
                bool dup = st.chance(dup_q);
                DurationNs dup_delay = st.next_in(1'000'000, 50'000'000);
                std::size_t acct = st.next_below(wl_.txn_accounts.size());
                std::int64_t amount = st.next_in(-max_amount, max_amount);
                if (amount == 0)
                    amount = 1;
                schedule_local(ci, t, [this, ci, dup, dup_delay, acct, amount](RefNs now) {
                    submit_txn(ci, acct, amount, dup, dup_delay, now);
                });
            }
        }
    }

    void submit_txn(int ci, std::size_t acct, std::int64_t amount, bool dup,
                    DurationNs dup_delay, RefNs now)
    {
        Node& n = nodes_[ci];
        if (crashed(ci, now))
            return;
        GlobalNs reading = n.clock.read(now);
        GlobalNs start_g = base_.next_permitted(reading);
        if (start_g > reading) {
            trace_.row(now, n.spec.id, "sparse_wait",
                       "from=" + std::to_string(reading) + ";to=" + std::to_string(start_g));
            schedule_local(ci, start_g, [this, ci, acct, amount, dup, dup_delay](RefNs t) {
                submit_txn(ci, acct, amount, dup, dup_delay, t);
            });
            return;
        }
        std::uint64_t seq = n.seq++;
        TxnMessage txn;
        txn.txn_id = n.spec.id + "-" + std::to_string(seq);
        txn.origin = n.spec.id;
        txn.sparse_interval = base_.classify(start_g).interval;
        txn.origin_seq = seq;
        txn.account = wl_.txn_accounts[acct];
        txn.amount = amount;
        trace_.row(now, n.spec.id, "txn_submit",
                   "id=" + txn.txn_id + ";interval=" + std::to_string(txn.sparse_interval) +
                       ";account=" + txn.account + ";amount=" + std::to_string(txn.amount) +
                       ";dup=" + std::to_string(dup ? 1 : 0));
        for (const std::string& r : wl_.txn_replicas)
            send_unicast(ci, r, txn);
        if (dup) {
            schedule_local(ci, start_g + dup_delay, [this, ci, txn](RefNs) {
                for (const std::string& r : wl_.txn_replicas)
                    send_unicast(ci, r, txn);
            });
        }
    }

    void handle(int dst, const Message&, const TxnMessage& t)
    {
        Node& n = nodes_[dst];
        n.txn_store.push_back(
            {t.txn_id, t.origin, t.sparse_interval, t.origin_seq, t.account, t.amount});
        trace_.row(q_.now(), n.spec.id, "txn_recv", "id=" + t.txn_id);
    }

    // Timed set-point outputs: send early, act simultaneously at a future
    // sparse instant.
    void setup_robot()
    {
        const json& p = sc_.workload.params;
        int ctl = node_index(p.at("controller").get<std::string>());
        wl_.robots = p.at("robots").get<std::vector<std::string>>();
        GlobalNs start = p.at("start_at_ns").get<GlobalNs>();
        DurationNs period = p.at("period_ns").get<DurationNs>();
        std::int64_t count = p.at("count").get<std::int64_t>();
        DurationNs lead = p.at("lead_ns").get<DurationNs>();
        for (std::int64_t k = 0; k < count; ++k) {
            schedule_local(ctl, start + k * period, [this, ctl, k, lead](RefNs now) {
                if (crashed(ctl, now))
                    return;
                Node& n = nodes_[ctl];
                GlobalNs act_at = base_.next_permitted(n.clock.read(now) + lead);
                trace_.row(now, n.spec.id, "timed_output_sent",
                           "sp=" + std::to_string(k) + ";act_at=" + std::to_string(act_at));
                for (const std::string& r : wl_.robots)
                    send_unicast(ctl, r, TimedOutput{k, act_at});
            });
        }
    }

    void handle(int dst, const Message&, const TimedOutput& to)
    {
        if (sc_.workload.kind == "tdma_control_loop" && dst != wl_.cl_actuator)
            return; // the medium broadcasts; only the actuator acts on set-points
        Node& n = nodes_[dst];
        GlobalNs now_g = n.clock.read(q_.now());
        if (now_g >= to.act_at_global) {
            ++m_.deadline_misses;
            trace_.row(q_.now(), n.spec.id, "deadline_miss",
                       "sp=" + std::to_string(to.set_point) +
                           ";act_at=" + std::to_string(to.act_at_global) +
                           ";now_global=" + std::to_string(now_g));
            return;
        }
        schedule_local(dst, to.act_at_global, [this, dst, to](RefNs now) {
            Node& nn = nodes_[dst];
            trace_.row(now, nn.spec.id, "actuation",
                       "sp=" + std::to_string(to.set_point) +
                           ";act_at=" + std::to_string(to.act_at_global) +
                           ";now_global=" + std::to_string(nn.clock.read(now)));
            wl_.actuations[to.set_point].emplace_back(nn.spec.id, now);
            if (sc_.workload.kind == "tdma_control_loop")
                record_aligned_actuation(to.set_point, now);
        });
    }

    // Phase-aligned pipeline on the slot schedule vs the same pipeline
    // event-driven over jittery links.
    void setup_control_loop()
    {
        const json& p = sc_.workload.params;
        std::vector<std::string> a = p.at("aligned");
        std::vector<std::string> u = p.at("unaligned");
        wl_.cl_sensor = node_index(a[0]);
        wl_.cl_controller = node_index(a[1]);
        wl_.cl_actuator = node_index(a[2]);
        wl_.cl_sensor_u = node_index(u[0]);
        wl_.cl_controller_u = node_index(u[1]);
        wl_.cl_actuator_u = node_index(u[2]);
        wl_.cl_start = p.at("start_at_ns").get<GlobalNs>();
        wl_.cl_cycle = p.at("cycle_ns").get<DurationNs>();
        wl_.cl_cycles = p.at("cycles").get<std::int64_t>();
        wl_.cl_sample_off = p.value("sample_offset_ns", GlobalNs{0});
        wl_.cl_compute = p.at("compute_ns").get<DurationNs>();
        wl_.cl_act_off = p.at("act_offset_ns").get<GlobalNs>();

        for (std::int64_t c = 0; c < wl_.cl_cycles; ++c) {
            GlobalNs due = wl_.cl_start + c * wl_.cl_cycle + wl_.cl_sample_off;
            schedule_local(wl_.cl_sensor, due, [this, c](RefNs now) {
                wl_.sample_ref_a[c] = now;
                trace_.row(now, nodes_[wl_.cl_sensor].spec.id, "sample",
                           "n=" + std::to_string(c) + ";mode=aligned");
                slot_send(wl_.cl_sensor, AppData{"sample", c});
            });
            schedule_local(wl_.cl_sensor_u, due, [this, c](RefNs now) {
                wl_.sample_ref_u[c] = now;
                trace_.row(now, nodes_[wl_.cl_sensor_u].spec.id, "sample",
                           "n=" + std::to_string(c) + ";mode=unaligned");
                send_unicast(wl_.cl_sensor_u, nodes_[wl_.cl_controller_u].spec.id,
                             AppData{"sample_u", c});
            });
        }
    }

    /// Transmit on the shared medium at the next start of the node's own
    /// slot (inset by the design precision, so a correct sender stays inside
    /// its slot under worst-case clock disagreement).
    void slot_send(int i, Payload pl)
    {
        Node& n = nodes_[i];
        int slot = sched_.slot_of(n.spec.id);
        if (slot < 0)
            return;
        GlobalNs at = sched_.next_slot_start(slot, n.clock.read(q_.now())) +
                      sc_.sparse.design_precision_ns;
        schedule_local(i, at, [this, i, pl = std::move(pl)](RefNs now) {
            if (!crashed(i, now))
                send_medium(i, pl);
        });
    }

    void record_aligned_actuation(std::int64_t c, RefNs now)
    {
        auto it = wl_.sample_ref_a.find(c);
        if (it == wl_.sample_ref_a.end())
            return;
        DurationNs dead = now - it->second;
        wl_.dead_a[c] = dead;
        trace_.row(now, nodes_[wl_.cl_actuator].spec.id, "dead_time",
                   "n=" + std::to_string(c) + ";ns=" + std::to_string(dead) +
                       ";mode=aligned");
    }

    void handle(int dst, const Message&, const AppData& a)
    {
        const std::string& kind = sc_.workload.kind;
        if (kind == "tdma_control_loop") {
            if (dst == wl_.cl_controller && a.tag == "sample") {
                std::int64_t c = a.value;
                GlobalNs ready = nodes_[dst].clock.read(q_.now()) + wl_.cl_compute;
                schedule_local(dst, ready, [this, c](RefNs) {
                    GlobalNs act_at = wl_.cl_start + c * wl_.cl_cycle + wl_.cl_act_off;
                    slot_send(wl_.cl_controller, TimedOutput{c, act_at});
                });
            } else if (dst == wl_.cl_controller_u && a.tag == "sample_u") {
                std::int64_t c = a.value;
                GlobalNs ready = nodes_[dst].clock.read(q_.now()) + wl_.cl_compute;
                schedule_local(dst, ready, [this, dst, c](RefNs) {
                    send_unicast(dst, nodes_[wl_.cl_actuator_u].spec.id,
                                 AppData{"act_u", c});
                });
            } else if (dst == wl_.cl_actuator_u && a.tag == "act_u") {
                std::int64_t c = a.value;
                auto it = wl_.sample_ref_u.find(c);
                if (it != wl_.sample_ref_u.end()) {
                    DurationNs dead = q_.now() - it->second;
                    wl_.dead_u[c] = dead;
                    trace_.row(q_.now(), nodes_[dst].spec.id, "dead_time",
                               "n=" + std::to_string(c) + ";ns=" + std::to_string(dead) +
                                   ";mode=unaligned");
                }
            }
            return;
        }
        if (kind == "replay") {
            if (dst == wl_.replay_receiver) {
                Node& n = nodes_[dst];
                ReplayFilter::Verdict v =
                    n.replay->check(a.tag, /*msg ts*/ wl_.replay_sent_ts.at(a.tag),
                                    n.clock.read(q_.now()));
                const char* name = v == ReplayFilter::Verdict::accept ? "accept"
                                   : v == ReplayFilter::Verdict::reject_replay
                                       ? "reject_replay"
                                       : "reject_stale";
                if (v == ReplayFilter::Verdict::accept)
                    ++wl_.replay_accepted;
                else if (v == ReplayFilter::Verdict::reject_replay)
                    ++wl_.replay_rejected_replay;
                else
                    ++wl_.replay_rejected_stale;
                trace_.row(q_.now(), n.spec.id, "replay_verdict",
                           "tag=" + a.tag + ";verdict=" + name);
            } else if (dst == wl_.replay_attacker) {
                std::size_t idx = wl_.replay_captures++;
                DurationNs delay =
                    wl_.replay_delays[idx % wl_.replay_delays.size()];
                GlobalNs resend_at = nodes_[dst].clock.read(q_.now()) + delay;
                schedule_local(dst, resend_at, [this, dst, a](RefNs now) {
                    if (!crashed(dst, now))
                        send_unicast(dst, nodes_[wl_.replay_receiver].spec.id, a);
                });
            }
            return;
        }
    }

    // Periodic life signs at synchronized global instants; the monitor
    // checks deadline k at emission instant k plus the margin. A second,
    // unsynchronized detector arms a local timeout per arrival for
    // comparison.
    void setup_lifesign()
    {
        const json& p = sc_.workload.params;
        int prod = node_index(p.at("producer").get<std::string>());
        int mon = node_index(p.at("monitor").get<std::string>());
        wl_.ls_producer = prod;
        wl_.ls_monitor = mon;
        GlobalNs start = p.at("start_at_ns").get<GlobalNs>();
        DurationNs period = p.at("period_ns").get<DurationNs>();
        DurationNs margin = p.at("margin_ns").get<DurationNs>();
        int misses = static_cast<int>(p.value("misses_to_fail", std::int64_t{1}));
        wl_.ls_local_timeout = p.value("local_timeout_ns", DurationNs{0});

        nodes_[mon].lifesign.emplace(LifesignConfig{period, margin, misses});

        schedule_emission(prod, mon, start, period, 1);
        schedule_deadline(mon, start, period, margin, 1);
        if (wl_.ls_local_timeout > 0)
            arm_local_timeout(mon, start + wl_.ls_local_timeout, 0);
    }

    void schedule_emission(int prod, int mon, GlobalNs start, DurationNs period,
                           std::int64_t k)
    {
        schedule_local(prod, start + k * period,
                       [this, prod, mon, start, period, k](RefNs now) {
                           schedule_emission(prod, mon, start, period, k + 1);
                           if (crashed(prod, now))
                               return;
                           trace_.row(now, nodes_[prod].spec.id, "lifesign_emit",
                                      "k=" + std::to_string(k));
                           send_unicast(prod, nodes_[mon].spec.id, LifeSign{k});
                       });
    }

    void schedule_deadline(int mon, GlobalNs start, DurationNs period, DurationNs margin,
                           std::int64_t k)
    {
        schedule_local(mon, start + k * period + margin,
                       [this, mon, start, period, margin, k](RefNs now) {
                           schedule_deadline(mon, start, period, margin, k + 1);
                           if (crashed(mon, now))
                               return;
                           Node& n = nodes_[mon];
                           auto v = n.lifesign->check_deadline(k);
                           bool failed = v == LifesignMonitor::Verdict::failed;
                           trace_.row(now, n.spec.id, "lifesign_deadline",
                                      "k=" + std::to_string(k) +
                                          ";verdict=" + (failed ? "failed" : "healthy"));
                           if (failed && wl_.detect_global_ref < 0) {
                               wl_.detect_global_ref = now;
                               trace_.row(now, n.spec.id, "lifesign_failure",
                                          "k=" + std::to_string(k) + ";mode=global");
                           }
                       });
    }

    void arm_local_timeout(int mon, GlobalNs due, std::int64_t count)
    {
        schedule_local(mon, due, [this, mon, count](RefNs now) {
            Node& n = nodes_[mon];
            if (n.lifesign_arrivals != count)
                return; // a newer arrival re-armed the timeout
            if (wl_.detect_local_ref < 0) {
                wl_.detect_local_ref = now;
                trace_.row(now, n.spec.id, "lifesign_failure", "mode=local");
            }
        });
    }

    void handle(int dst, const Message&, const LifeSign& ls)
    {
        Node& n = nodes_[dst];
        if (!n.lifesign)
            return;
        n.lifesign->record_arrival(ls.emission_index);
        ++n.lifesign_arrivals;
        trace_.row(q_.now(), n.spec.id, "lifesign_recv",
                   "k=" + std::to_string(ls.emission_index));
        if (wl_.ls_local_timeout > 0)
            arm_local_timeout(dst, n.clock.read(q_.now()) + wl_.ls_local_timeout,
                              n.lifesign_arrivals);
    }

    // Every slot owner broadcasts once per round in its own slot.
    void setup_tdma_traffic()
    {
        GlobalNs start = sc_.workload.params.at("start_at_ns").get<GlobalNs>();
        for (std::size_t s = 0; s < sched_.slots().size(); ++s) {
            int i = node_index(sched_.slots()[s].owner);
            schedule_slot_traffic(i, static_cast<int>(s), start, 0);
        }
    }

    void schedule_slot_traffic(int i, int slot, GlobalNs from, std::int64_t round)
    {
        GlobalNs at = sched_.next_slot_start(slot, from) + sc_.sparse.design_precision_ns;
        if (at > sc_.horizon_ns + sched_.round_ns())
            return;
        schedule_local(i, at, [this, i, slot, at, round](RefNs now) {
            schedule_slot_traffic(i, slot, at + 1, round + 1);
            if (crashed(i, now))
                return;
            send_medium(i, AppData{"telemetry", round});
        });
    }

    void handle(int, const Message&, const SlotData&) {}
    void handle(int, const Message&, const Babble&) {}
    void handle(int, const Message&, const ExtTimeReply&) {}
    void handle(int, const Message&, const SyncReading&) {} // handled in deliver_sync

    // Messages replayed by an eavesdropper; the receiver filters on the
    // global timestamp carried in each message.
    void setup_replay()
    {
        const json& p = sc_.workload.params;
        int snd = node_index(p.at("sender").get<std::string>());
        wl_.replay_receiver = node_index(p.at("receiver").get<std::string>());
        wl_.replay_attacker = node_index(p.at("attacker").get<std::string>());
        GlobalNs start = p.at("start_at_ns").get<GlobalNs>();
        DurationNs period = p.at("period_ns").get<DurationNs>();
        std::int64_t count = p.at("count").get<std::int64_t>();
        DurationNs window = p.at("window_ns").get<DurationNs>();
        wl_.replay_delays = p.at("replay_delays_ns").get<std::vector<DurationNs>>();

        nodes_[wl_.replay_receiver].replay.emplace(window, sc_.sparse.design_precision_ns);

        for (std::int64_t k = 0; k < count; ++k) {
            schedule_local(snd, start + k * period, [this, snd, k](RefNs now) {
                if (crashed(snd, now))
                    return;
                Node& n = nodes_[snd];
                std::string tag = "m" + std::to_string(k);
                wl_.replay_sent_ts[tag] = n.clock.read(now);
                send_unicast(snd, nodes_[wl_.replay_receiver].spec.id, AppData{tag, k});
                send_unicast(snd, nodes_[wl_.replay_attacker].spec.id, AppData{tag, k});
            });
        }
    }

    // A causal cascade of local events logged with sparse timestamps from
    // the synchronized clocks, and in parallel with free-running timestamps.
    void setup_log_merge()
    {
        const json& p = sc_.workload.params;
        GlobalNs start = p.at("start_at_ns").get<GlobalNs>();
        std::int64_t events = p.at("events").get<std::int64_t>();
        DurationNs gmin = p.at("gap_min_ns").get<DurationNs>();
        DurationNs gmax = p.at("gap_max_ns").get<DurationNs>();
        std::vector<std::string> sources;
        if (p.contains("sources"))
            sources = p.at("sources").get<std::vector<std::string>>();
        else
            for (const NodeSpec& n : sc_.nodes)
                sources.push_back(n.id);

        RngStream& st = stream("wl:log_merge");
        RefNs t = start;
        for (std::int64_t e = 0; e < events; ++e) {
            t += st.next_in(gmin, gmax);
            const std::string& src = sources[st.next_below(sources.size())];
            int i = node_index(src);
            wl_.truth.push_back({e, t, src});
            q_.schedule(t, [this, i, e] { log_event(i, e); });
        }
    }

    void log_event(int i, std::int64_t e)
    {
        RefNs now = q_.now();
        Node& n = nodes_[i];
        if (crashed(i, now))
            return;
        std::uint64_t seq = n.seq++;
        std::string what = "e" + std::to_string(e);
        GlobalNs sync_ts = n.clock.read(now);
        LocalNs free_ts = free_run_reading(i, now);
        std::int64_t k_sync = base_.interval_at_or_below(std::max(sync_ts, base_.epoch_ns()));
        std::int64_t k_free = base_.interval_at_or_below(std::max(free_ts, base_.epoch_ns()));
        n.log_sync.push_back({k_sync, n.spec.id, seq, what});
        n.log_free.push_back({k_free, n.spec.id, seq, what});
        trace_.row(now, n.spec.id, "logged",
                   "e=" + std::to_string(e) + ";interval=" + std::to_string(k_sync) +
                       ";free_interval=" + std::to_string(k_free));
    }

    /// What the clock would read had it never been corrected.
    LocalNs free_run_reading(int i, RefNs t) const
    {
        const NodeSpec& s = nodes_[i].spec;
        LocalNs raw = s.initial_offset_ns + t + mul_div_floor(s.drift_ppb, t, ppb_scale);
        return floor_to_granule(raw, s.granularity_ns);
    }

    // -- post-run measurement -------------------------------------------------

    void finalize()
    {
        compute_precision_series();
        finalize_workload();
    }

    void compute_precision_series()
    {
        DurationNs stride = internal_sync_on() || !external_sync_on()
                                ? syncc_.resync_interval_ns
                                : sc_.sync.external->period_ns * 10;
        if (stride <= 0)
            stride = 100'000'000;

        // steady state begins once every live node has applied two rounds
        RefNs steady = 0;
        if (internal_sync_on()) {
            for (const Node& n : nodes_)
                if (n.round_apply_refs.size() >= 2)
                    steady = std::max(steady, n.round_apply_refs[1]);
        } else if (external_sync_on()) {
            steady = 2 * sc_.sync.external->period_ns + sc_.sync.external->link.d_max_ns;
        }
        m_.steady_from_ns = steady;

        for (RefNs from = 0; from < sc_.horizon_ns; from += stride) {
            RefNs to = std::min(from + stride, sc_.horizon_ns);
            std::vector<const LocalClock*> ens;
            for (std::size_t j = 0; j < nodes_.size(); ++j)
                if (!node_faulty_in(static_cast<int>(j), from, to))
                    ens.push_back(&nodes_[j].clock);
            if (ens.size() < 2)
                continue;
            Precision pr = measure_precision(ens, from, to);
            m_.precision_series.push_back({from, to, pr.pi_ns});
            m_.max_pi_ns = std::max(m_.max_pi_ns, pr.pi_ns);
            if (from >= steady)
                m_.steady_pi_ns = std::max(m_.steady_pi_ns, pr.pi_ns);
            trace_.row(to, "*", "precision",
                       "from=" + std::to_string(from) + ";to=" + std::to_string(to) +
                           ";pi=" + std::to_string(pr.pi_ns));
        }
    }

    void finalize_workload()
    {
        const std::string& kind = sc_.workload.kind;
        json& w = m_.workload;
        if (kind == "ski_race") {
            json agreements = json::array();
            for (const auto& a : wl_.agreements)
                agreements.push_back(json{{"event", a.event},
                                          {"cs", a.cs},
                                          {"agreed", a.agreed},
                                          {"interval", a.interval}});
            // reported duration: primary finish reading minus primary start reading
            const json& p = sc_.workload.params;
            std::string s0 = p.at("start_observers")[0].get<std::string>();
            std::string f0 = p.at("finish_observers")[0].get<std::string>();
            GlobalNs start_ts = nodes_[node_index(s0)].shares[1][s0];
            GlobalNs finish_ts = nodes_[node_index(f0)].shares[2][f0];
            DurationNs true_dur = wl_.ski_finish_ref - wl_.ski_start_ref;
            Precision pr = measure_eligible(wl_.ski_start_ref, wl_.ski_finish_ref);
            w = json{{"reported_duration_ns", finish_ts - start_ts},
                     {"true_duration_ns", true_dur},
                     {"error_ns", (finish_ts - start_ts) - true_dur},
                     {"race_pi_ns", pr.pi_ns},
                     {"agreements", agreements}};
        } else if (kind == "grid_snapshot") {
            RefNs lo = 0, hi = 0;
            bool first = true;
            json samples = json::object();
            for (const auto& [cs, ref] : wl_.grid_samples) {
                samples[cs] = ref;
                lo = first ? ref : std::min(lo, ref);
                hi = first ? ref : std::max(hi, ref);
                first = false;
            }
            GlobalNs at = sc_.workload.params.at("sample_at_global_ns").get<GlobalNs>();
            Precision pr = measure_eligible(at - 50'000'000, at + 50'000'000);
            json checks = json::array();
            for (const auto& [probe, valid] : wl_.grid_checks)
                checks.push_back(json{{"probe_ns", probe}, {"valid", valid}});
            w = json{{"samples", samples},
                     {"spread_ns", first ? -1 : hi - lo},
                     {"window_pi_ns", pr.pi_ns},
                     {"validity_checks", checks}};
        } else if (kind == "txn_ledger") {
            json replicas = json::object();
            std::vector<std::vector<std::string>> orders;
            std::int64_t integrity = 0;
            for (const std::string& r : wl_.txn_replicas) {
                Node& n = nodes_[node_index(r)];
                OrderedTransactions ot = order_transactions(n.txn_store);
                integrity += static_cast<std::int64_t>(ot.integrity_errors.size());
                std::map<std::string, std::int64_t> bal;
                for (const std::string& a : wl_.txn_accounts)
                    bal[a] = wl_.txn_initial_balance;
                bal = apply_ledger(ot.ordered, std::move(bal));
                std::vector<std::string> order;
                for (const Transaction& t : ot.ordered)
                    order.push_back(t.id);
                orders.push_back(order);
                replicas[r] = json{{"received", n.txn_store.size()},
                                   {"applied", ot.ordered.size()},
                                   {"balances", bal},
                                   {"order", order}};
            }
            bool equal = true;
            for (std::size_t i = 1; i < orders.size(); ++i)
                equal = equal && orders[i] == orders[0];
            w = json{{"replicas", replicas},
                     {"replicas_equal", equal},
                     {"integrity_errors", integrity}};
        } else if (kind == "robot_sync") {
            DurationNs worst = -1;
            json groups = json::array();
            for (const auto& [sp, acts] : wl_.actuations) {
                RefNs lo = acts[0].second, hi = acts[0].second;
                for (const auto& [cs, ref] : acts) {
                    lo = std::min(lo, ref);
                    hi = std::max(hi, ref);
                }
                DurationNs spread = hi - lo;
                worst = std::max(worst, spread);
                groups.push_back(json{{"sp", sp},
                                      {"n", acts.size()},
                                      {"spread_ns", spread}});
            }
            w = json{{"groups", groups},
                     {"max_spread_ns", worst},
                     {"deadline_misses", m_.deadline_misses}};
        } else if (kind == "tdma_control_loop") {
            w = json{{"aligned", dead_time_stats(wl_.dead_a)},
                     {"unaligned", dead_time_stats(wl_.dead_u)}};
        } else if (kind == "lifesign") {
            w = json{{"crash_ref_ns", wl_.crash_ref},
                     {"detect_global_ref_ns", wl_.detect_global_ref},
                     {"detect_local_ref_ns", wl_.detect_local_ref},
                     {"latency_global_ns",
                      (wl_.crash_ref >= 0 && wl_.detect_global_ref >= 0)
                          ? wl_.detect_global_ref - wl_.crash_ref
                          : -1},
                     {"latency_local_ns",
                      (wl_.crash_ref >= 0 && wl_.detect_local_ref >= 0)
                          ? wl_.detect_local_ref - wl_.crash_ref
                          : -1}};
        } else if (kind == "replay") {
            w = json{{"accepted", wl_.replay_accepted},
                     {"rejected_replay", wl_.replay_rejected_replay},
                     {"rejected_stale", wl_.replay_rejected_stale}};
        } else if (kind == "log_merge") {
            finalize_log_merge(w);
        } else if (kind == "tdma_traffic") {
            w = json{{"collisions", m_.collisions},
                     {"collisions_outside_babbler_slot",
                      m_.collisions_outside_babbler_slot},
                     {"guardian_blocks", m_.guardian_blocks}};
        }
    }

    json dead_time_stats(const std::map<std::int64_t, DurationNs>& series) const
    {
        json arr = json::array();
        DurationNs lo = 0, hi = 0;
        bool first = true;
        for (const auto& [n, d] : series) {
            arr.push_back(json{{"n", n}, {"ns", d}});
            lo = first ? d : std::min(lo, d);
            hi = first ? d : std::max(hi, d);
            first = false;
        }
        return json{{"series", arr},
                    {"count", series.size()},
                    {"min_ns", first ? -1 : lo},
                    {"max_ns", first ? -1 : hi},
                    {"jitter_ns", first ? -1 : hi - lo}};
    }

    void finalize_log_merge(json& w)
    {
        std::vector<std::vector<LogRecord>> sync_logs, free_logs;
        for (const Node& n : nodes_) {
            sync_logs.push_back(n.log_sync);
            free_logs.push_back(n.log_free);
        }
        wl_.merged_sync = merge_logs(sync_logs);
        std::vector<LogRecord> merged_free = merge_logs(free_logs);

        // A true separation beyond one full cycle plus the precision bound
        // guarantees distinct, correctly ordered intervals on synchronized
        // clocks; anything closer may legitimately tie.
        DurationNs safe_sep = base_.cycle_ns() + sc_.sparse.design_precision_ns;
        auto violations = [&](const std::vector<LogRecord>& merged) {
            std::map<std::string, std::size_t> pos;
            for (std::size_t i = 0; i < merged.size(); ++i)
                pos[merged[i].what] = i;
            std::int64_t count = 0;
            wl_.ordered_pairs = 0;
            for (std::size_t i = 0; i < wl_.truth.size(); ++i) {
                for (std::size_t j = i + 1; j < wl_.truth.size(); ++j) {
                    if (wl_.truth[j].ref - wl_.truth[i].ref <= safe_sep)
                        continue;
                    ++wl_.ordered_pairs;
                    auto pi = pos.find("e" + std::to_string(wl_.truth[i].idx));
                    auto pj = pos.find("e" + std::to_string(wl_.truth[j].idx));
                    if (pi == pos.end() || pj == pos.end())
                        continue;
                    if (pi->second > pj->second)
                        ++count;
                }
            }
            return count;
        };
        std::int64_t v_sync = violations(wl_.merged_sync);
        std::int64_t v_free = violations(merged_free);
        w = json{{"events", wl_.truth.size()},
                 {"pairs_separated_beyond_cycle", wl_.ordered_pairs},
                 {"order_violations_synchronized", v_sync},
                 {"order_violations_free_running", v_free}};
    }

    /// Window precision over all nodes not faulty in the window.
    Precision measure_eligible(RefNs from, RefNs to) const
    {
        std::vector<const LocalClock*> ens;
        for (std::size_t j = 0; j < nodes_.size(); ++j)
            if (!node_faulty_in(static_cast<int>(j), from, to))
                ens.push_back(&nodes_[j].clock);
        if (ens.size() < 2)
            return {-1, from, to};
        return measure_precision(ens, from, to);
    }

    // -- state -----------------------------------------------------------------

    struct Transmission {
        RefNs start_ns;
        RefNs end_ns;
        bool corrupted;
    };

    struct WlState {
        // ski race
        RefNs ski_start_ref = -1, ski_finish_ref = -1;
        struct Agreement {
            std::uint64_t event;
            std::string cs;
            bool agreed;
            std::int64_t interval;
        };
        std::vector<Agreement> agreements;
        // grid snapshot
        std::map<std::string, RefNs> grid_samples;
        std::vector<std::pair<DurationNs, bool>> grid_checks;
        // transactions
        std::vector<std::string> txn_replicas, txn_accounts;
        std::int64_t txn_initial_balance = 0;
        // robots / timed outputs
        std::vector<std::string> robots;
        std::map<std::int64_t, std::vector<std::pair<std::string, RefNs>>> actuations;
        // control loop
        int cl_sensor = -1, cl_controller = -1, cl_actuator = -1;
        int cl_sensor_u = -1, cl_controller_u = -1, cl_actuator_u = -1;
        GlobalNs cl_start = 0, cl_sample_off = 0, cl_act_off = 0;
        DurationNs cl_cycle = 0, cl_compute = 0;
        std::int64_t cl_cycles = 0;
        std::map<std::int64_t, RefNs> sample_ref_a, sample_ref_u;
        std::map<std::int64_t, DurationNs> dead_a, dead_u;
        // lifesign
        int ls_producer = -1, ls_monitor = -1;
        DurationNs ls_local_timeout = 0;
        RefNs crash_ref = -1, detect_global_ref = -1, detect_local_ref = -1;
        // replay
        int replay_receiver = -1, replay_attacker = -1;
        std::vector<DurationNs> replay_delays;
        std::map<std::string, GlobalNs> replay_sent_ts;
        std::size_t replay_captures = 0;
        std::int64_t replay_accepted = 0, replay_rejected_replay = 0,
                     replay_rejected_stale = 0;
        // log merge
        struct TruthEvent {
            std::int64_t idx;
            RefNs ref;
            std::string source;
        };
        std::vector<TruthEvent> truth;
        std::vector<LogRecord> merged_sync;
        std::int64_t ordered_pairs = 0;
    };

    Scenario sc_;
    std::uint64_t seed_;
    EventQueue q_;
    std::vector<Node> nodes_;
    std::map<std::string, int> index_;
    TraceWriter trace_;
    Metrics m_;
    std::map<std::string, RngStream> streams_;
    SparseTimeBase base_;
    SyncConfig syncc_;
    TdmaSchedule sched_;
    TimeServer server_;
    RefNs accuracy_floor_ = 0;
    std::map<std::uint64_t, Transmission> medium_txs_;
    std::vector<std::uint64_t> medium_active_;
    WlState wl_;
    std::uint64_t next_alarm_id_ = 1;
    std::uint64_t next_msg_id_ = 1;
    bool ran_ = false;
};

} // namespace sostime
