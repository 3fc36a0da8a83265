#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sostime/network.hpp"
#include "sostime/sparse.hpp"
#include "sostime/sync.hpp"
#include "sostime/tdma.hpp"
#include "sostime/time.hpp"

namespace sostime {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Declarative scenario model (JSON-backed)

struct NodeSpec {
    std::string id;
    Ppb drift_ppb = 0;
    std::int64_t granularity_ns = 1;
    LocalNs initial_offset_ns = 0;
    std::string guardian = "none"; ///< none | shared | own
    Ppb guardian_drift_ppb = 0;
    LocalNs guardian_initial_offset_ns = 0;

    bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec {
    DurationNs d_min_ns = 0;
    DurationNs d_max_ns = 0;
    double loss_prob = 0.0;

    bool operator==(const LinkSpec&) const = default;

    LinkModel model() const
    {
        return {d_min_ns, d_max_ns, RngStream::quantize_probability(loss_prob)};
    }
};

struct LinkOverride {
    std::string src; ///< node id or "*"
    std::string dst;
    LinkSpec link;

    bool operator==(const LinkOverride&) const = default;
};

struct MediumSpec {
    DurationNs tx_time_ns = 1000; ///< time a transmission occupies the medium
    LinkSpec link;

    bool operator==(const MediumSpec&) const = default;
};

struct ExternalSyncSpec {
    DurationNs period_ns = 10'000'000;
    DurationNs accuracy_ns = 100;
    LinkSpec link;
    std::vector<TimeServer::UpWindow> availability; ///< empty = always up

    bool operator==(const ExternalSyncSpec& o) const
    {
        if (!(period_ns == o.period_ns && accuracy_ns == o.accuracy_ns && link == o.link))
            return false;
        if (availability.size() != o.availability.size())
            return false;
        for (std::size_t i = 0; i < availability.size(); ++i)
            if (availability[i].from != o.availability[i].from ||
                availability[i].until != o.availability[i].until)
                return false;
        return true;
    }
};

struct SyncSpec {
    SyncMode mode = SyncMode::none;
    DurationNs resync_interval_ns = 100'000'000;
    int max_faulty = 0;
    DurationNs reading_error_ns = 0;
    DurationNs collect_ns = 0; ///< 0 = R/2
    bool rate_correction = false;
    LinkSpec link; ///< dedicated sync-message link (the TT network)
    std::optional<ExternalSyncSpec> external;

    bool operator==(const SyncSpec&) const = default;

    SyncConfig config() const
    {
        return {resync_interval_ns, max_faulty, reading_error_ns, mode, collect_ns,
                rate_correction};
    }
};

struct SparseSpec {
    DurationNs permitted_ns = 0;  ///< 0 = max(g, design_precision)
    DurationNs forbidden_ns = 0;  ///< 0 = 2 * design_precision
    GlobalNs epoch_ns = 0;
    DurationNs design_precision_ns = 1000; ///< Pi_design, the promised precision bound

    bool operator==(const SparseSpec&) const = default;

    DurationNs effective_permitted(std::int64_t g_max) const
    {
        return permitted_ns > 0 ? permitted_ns
                                : std::max<DurationNs>(g_max, design_precision_ns);
    }
    DurationNs effective_forbidden() const
    {
        return forbidden_ns > 0 ? forbidden_ns : 2 * design_precision_ns;
    }
    SparseTimeBase base(std::int64_t g_max) const
    {
        return SparseTimeBase(effective_permitted(g_max), effective_forbidden(), epoch_ns,
                              /*base_id=*/1);
    }
};

struct TdmaSpec {
    DurationNs round_ns = 0;
    DurationNs guard_gap_ns = 0;
    std::vector<TdmaSlot> slots;

    bool operator==(const TdmaSpec& o) const
    {
        if (round_ns != o.round_ns || guard_gap_ns != o.guard_gap_ns ||
            slots.size() != o.slots.size())
            return false;
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i].owner != o.slots[i].owner ||
                slots[i].offset_ns != o.slots[i].offset_ns ||
                slots[i].duration_ns != o.slots[i].duration_ns)
                return false;
        return true;
    }

    TdmaSchedule schedule() const { return TdmaSchedule(round_ns, guard_gap_ns, slots); }
};

struct FaultSpec {
    std::string target;
    std::string kind; ///< crash | babbling | clock_drift_step | clock_freeze
    RefNs from_ns = 0;
    RefNs until_ns = 0;
    Ppb drift_delta_ppb = 0;
    DurationNs babble_period_ns = 0;

    bool operator==(const FaultSpec&) const = default;

    FaultInjection injection() const
    {
        FaultKind k = FaultKind::crash;
        if (kind == "babbling")
            k = FaultKind::babbling;
        else if (kind == "clock_drift_step")
            k = FaultKind::clock_drift_step;
        else if (kind == "clock_freeze")
            k = FaultKind::clock_freeze;
        return {target, k, from_ns, until_ns, drift_delta_ppb, babble_period_ns};
    }
};

struct WorkloadSpec {
    std::string kind = "none";
    json params = json::object();

    bool operator==(const WorkloadSpec&) const = default;
};

struct Scenario {
    std::string name;
    RefNs horizon_ns = 1'000'000'000;
    std::uint64_t seed = 0;
    Ppb rho_max_ppb = 0; ///< declared drift bound; violations only via clock faults
    std::vector<NodeSpec> nodes;
    LinkSpec default_link;
    std::vector<LinkOverride> link_overrides;
    std::optional<MediumSpec> medium;
    SyncSpec sync;
    SparseSpec sparse;
    std::optional<TdmaSpec> tdma;
    std::vector<FaultSpec> faults;
    WorkloadSpec workload;

    bool operator==(const Scenario&) const = default;

    std::int64_t max_granularity() const
    {
        std::int64_t g = 1;
        for (const NodeSpec& n : nodes)
            g = std::max(g, n.granularity_ns);
        return g;
    }

    const NodeSpec* find_node(const std::string& id) const
    {
        for (const NodeSpec& n : nodes)
            if (n.id == id)
                return &n;
        return nullptr;
    }

    /// Effective unicast link parameters for src -> dst.
    LinkSpec link_between(const std::string& src, const std::string& dst) const
    {
        const LinkSpec* best = &default_link;
        int best_score = -1;
        for (const LinkOverride& o : link_overrides) {
            bool sm = (o.src == "*" || o.src == src);
            bool dm = (o.dst == "*" || o.dst == dst);
            if (!sm || !dm)
                continue;
            int score = (o.src != "*") + (o.dst != "*");
            if (score > best_score) {
                best_score = score;
                best = &o.link;
            }
        }
        return *best;
    }
};

// ---------------------------------------------------------------------------
// JSON serialization (canonical form: every field emitted)

inline void to_json(json& j, const NodeSpec& n)
{
    j = json{{"id", n.id},
             {"drift_ppb", n.drift_ppb},
             {"granularity_ns", n.granularity_ns},
             {"initial_offset_ns", n.initial_offset_ns},
             {"guardian", n.guardian},
             {"guardian_drift_ppb", n.guardian_drift_ppb},
             {"guardian_initial_offset_ns", n.guardian_initial_offset_ns}};
}

inline void from_json(const json& j, NodeSpec& n)
{
    j.at("id").get_to(n.id);
    n.drift_ppb = j.value("drift_ppb", Ppb{0});
    n.granularity_ns = j.value("granularity_ns", std::int64_t{1});
    n.initial_offset_ns = j.value("initial_offset_ns", LocalNs{0});
    n.guardian = j.value("guardian", std::string{"none"});
    n.guardian_drift_ppb = j.value("guardian_drift_ppb", Ppb{0});
    n.guardian_initial_offset_ns = j.value("guardian_initial_offset_ns", LocalNs{0});
}

inline void to_json(json& j, const LinkSpec& l)
{
    j = json{{"d_min_ns", l.d_min_ns}, {"d_max_ns", l.d_max_ns}, {"loss_prob", l.loss_prob}};
}

inline void from_json(const json& j, LinkSpec& l)
{
    l.d_min_ns = j.value("d_min_ns", DurationNs{0});
    l.d_max_ns = j.value("d_max_ns", DurationNs{0});
    l.loss_prob = j.value("loss_prob", 0.0);
}

inline void to_json(json& j, const LinkOverride& o)
{
    j = json{{"src", o.src}, {"dst", o.dst}, {"link", o.link}};
}

inline void from_json(const json& j, LinkOverride& o)
{
    o.src = j.value("src", std::string{"*"});
    o.dst = j.value("dst", std::string{"*"});
    from_json(j.at("link"), o.link);
}

inline void to_json(json& j, const MediumSpec& m)
{
    j = json{{"tx_time_ns", m.tx_time_ns}, {"link", m.link}};
}

inline void from_json(const json& j, MediumSpec& m)
{
    m.tx_time_ns = j.value("tx_time_ns", DurationNs{1000});
    if (j.contains("link"))
        from_json(j.at("link"), m.link);
}

inline void to_json(json& j, const ExternalSyncSpec& e)
{
    json avail = json::array();
    for (const auto& w : e.availability)
        avail.push_back(json{{"from_ns", w.from}, {"until_ns", w.until}});
    j = json{{"period_ns", e.period_ns},
             {"accuracy_ns", e.accuracy_ns},
             {"link", e.link},
             {"availability", avail}};
}

inline void from_json(const json& j, ExternalSyncSpec& e)
{
    e.period_ns = j.value("period_ns", DurationNs{10'000'000});
    e.accuracy_ns = j.value("accuracy_ns", DurationNs{100});
    if (j.contains("link"))
        from_json(j.at("link"), e.link);
    e.availability.clear();
    if (j.contains("availability"))
        for (const json& w : j.at("availability"))
            e.availability.push_back(
                {w.at("from_ns").get<RefNs>(), w.at("until_ns").get<RefNs>()});
}

inline std::string sync_mode_name(SyncMode m)
{
    switch (m) {
    case SyncMode::none: return "none";
    case SyncMode::internal: return "internal";
    case SyncMode::external: return "external";
    case SyncMode::combined: return "combined";
    }
    return "none";
}

inline SyncMode sync_mode_from(const std::string& s)
{
    if (s == "internal")
        return SyncMode::internal;
    if (s == "external")
        return SyncMode::external;
    if (s == "combined")
        return SyncMode::combined;
    if (s == "none")
        return SyncMode::none;
    throw std::invalid_argument("unknown sync mode: " + s);
}

inline void to_json(json& j, const SyncSpec& s)
{
    j = json{{"mode", sync_mode_name(s.mode)},
             {"resync_interval_ns", s.resync_interval_ns},
             {"max_faulty", s.max_faulty},
             {"reading_error_ns", s.reading_error_ns},
             {"collect_ns", s.collect_ns},
             {"rate_correction", s.rate_correction},
             {"link", s.link}};
    if (s.external)
        j["external"] = *s.external;
}

inline void from_json(const json& j, SyncSpec& s)
{
    s.mode = sync_mode_from(j.value("mode", std::string{"none"}));
    s.resync_interval_ns = j.value("resync_interval_ns", DurationNs{100'000'000});
    s.max_faulty = j.value("max_faulty", 0);
    s.reading_error_ns = j.value("reading_error_ns", DurationNs{0});
    s.collect_ns = j.value("collect_ns", DurationNs{0});
    s.rate_correction = j.value("rate_correction", false);
    if (j.contains("link"))
        from_json(j.at("link"), s.link);
    if (j.contains("external")) {
        ExternalSyncSpec e;
        from_json(j.at("external"), e);
        s.external = e;
    } else {
        s.external.reset();
    }
}

inline void to_json(json& j, const SparseSpec& s)
{
    j = json{{"permitted_ns", s.permitted_ns},
             {"forbidden_ns", s.forbidden_ns},
             {"epoch_ns", s.epoch_ns},
             {"design_precision_ns", s.design_precision_ns}};
}

inline void from_json(const json& j, SparseSpec& s)
{
    s.permitted_ns = j.value("permitted_ns", DurationNs{0});
    s.forbidden_ns = j.value("forbidden_ns", DurationNs{0});
    s.epoch_ns = j.value("epoch_ns", GlobalNs{0});
    s.design_precision_ns = j.value("design_precision_ns", DurationNs{1000});
}

inline void to_json(json& j, const TdmaSpec& t)
{
    json slots = json::array();
    for (const TdmaSlot& s : t.slots)
        slots.push_back(json{{"owner", s.owner},
                             {"offset_ns", s.offset_ns},
                             {"duration_ns", s.duration_ns}});
    j = json{{"round_ns", t.round_ns}, {"guard_gap_ns", t.guard_gap_ns}, {"slots", slots}};
}

inline void from_json(const json& j, TdmaSpec& t)
{
    t.round_ns = j.value("round_ns", DurationNs{0});
    t.guard_gap_ns = j.value("guard_gap_ns", DurationNs{0});
    t.slots.clear();
    if (j.contains("slots"))
        for (const json& s : j.at("slots"))
            t.slots.push_back({s.at("owner").get<std::string>(),
                               s.at("offset_ns").get<GlobalNs>(),
                               s.at("duration_ns").get<DurationNs>()});
}

inline void to_json(json& j, const FaultSpec& f)
{
    j = json{{"target", f.target},
             {"kind", f.kind},
             {"from_ns", f.from_ns},
             {"until_ns", f.until_ns},
             {"drift_delta_ppb", f.drift_delta_ppb},
             {"babble_period_ns", f.babble_period_ns}};
}

inline void from_json(const json& j, FaultSpec& f)
{
    j.at("target").get_to(f.target);
    j.at("kind").get_to(f.kind);
    f.from_ns = j.value("from_ns", RefNs{0});
    f.until_ns = j.value("until_ns", RefNs{0});
    f.drift_delta_ppb = j.value("drift_delta_ppb", Ppb{0});
    f.babble_period_ns = j.value("babble_period_ns", DurationNs{0});
}

inline void to_json(json& j, const WorkloadSpec& w)
{
    j = json{{"kind", w.kind}, {"params", w.params}};
}

inline void from_json(const json& j, WorkloadSpec& w)
{
    w.kind = j.value("kind", std::string{"none"});
    w.params = j.value("params", json::object());
}

inline void to_json(json& j, const Scenario& s)
{
    j = json{{"name", s.name},
             {"horizon_ns", s.horizon_ns},
             {"seed", s.seed},
             {"rho_max_ppb", s.rho_max_ppb},
             {"nodes", s.nodes},
             {"default_link", s.default_link},
             {"link_overrides", s.link_overrides},
             {"sync", s.sync},
             {"sparse", s.sparse},
             {"faults", s.faults},
             {"workload", s.workload}};
    if (s.medium)
        j["medium"] = *s.medium;
    if (s.tdma)
        j["tdma"] = *s.tdma;
}

inline void from_json(const json& j, Scenario& s)
{
    s.name = j.value("name", std::string{});
    s.horizon_ns = j.value("horizon_ns", RefNs{1'000'000'000});
    s.seed = j.value("seed", std::uint64_t{0});
    s.rho_max_ppb = j.value("rho_max_ppb", Ppb{0});
    s.nodes.clear();
    for (const json& n : j.at("nodes"))
        s.nodes.push_back(n.get<NodeSpec>());
    if (j.contains("default_link"))
        from_json(j.at("default_link"), s.default_link);
    s.link_overrides.clear();
    if (j.contains("link_overrides"))
        for (const json& o : j.at("link_overrides"))
            s.link_overrides.push_back(o.get<LinkOverride>());
    if (j.contains("medium")) {
        MediumSpec m;
        from_json(j.at("medium"), m);
        s.medium = m;
    } else {
        s.medium.reset();
    }
    if (j.contains("sync"))
        from_json(j.at("sync"), s.sync);
    if (j.contains("sparse"))
        from_json(j.at("sparse"), s.sparse);
    if (j.contains("tdma")) {
        TdmaSpec t;
        from_json(j.at("tdma"), t);
        s.tdma = t;
    } else {
        s.tdma.reset();
    }
    s.faults.clear();
    if (j.contains("faults"))
        for (const json& f : j.at("faults"))
            s.faults.push_back(f.get<FaultSpec>());
    if (j.contains("workload"))
        from_json(j.at("workload"), s.workload);
}

// ---------------------------------------------------------------------------
// Validation

/// Check every load-time invariant; returns diagnostics with JSON-path
/// prefixes (empty = valid).
std::vector<std::string> validate(const Scenario& sc);

namespace detail {

inline void check_link(const LinkSpec& l, const std::string& at, std::vector<std::string>& out)
{
    if (l.d_min_ns < 0 || l.d_max_ns < l.d_min_ns)
        out.push_back(at + ": need 0 <= d_min_ns <= d_max_ns");
    if (l.loss_prob < 0.0 || l.loss_prob > 1.0)
        out.push_back(at + ": loss_prob outside [0,1]");
}

/// Remote-reading error induced by a link: jitter midpoint residue plus
/// drift accumulated in flight plus one granule of quantization.
inline DurationNs reading_error_floor(const LinkSpec& l, Ppb rho_max, std::int64_t g_max)
{
    return ceil_div(l.d_max_ns - l.d_min_ns, 2) + mul_div_ceil(rho_max, l.d_max_ns, ppb_scale) +
           g_max;
}

/// Fetch an integer workload parameter, collecting a diagnostic when it is
/// absent or non-integral.
inline std::int64_t wp_int(const json& p, const std::string& key, std::int64_t fallback,
                           bool required, std::vector<std::string>& out)
{
    if (!p.contains(key)) {
        if (required)
            out.push_back("$.workload.params." + key + ": missing");
        return fallback;
    }
    if (!p.at(key).is_number_integer()) {
        out.push_back("$.workload.params." + key + ": must be an integer");
        return fallback;
    }
    return p.at(key).get<std::int64_t>();
}

inline std::string wp_node(const Scenario& sc, const json& p, const std::string& key,
                           std::vector<std::string>& out)
{
    if (!p.contains(key) || !p.at(key).is_string()) {
        out.push_back("$.workload.params." + key + ": missing node id");
        return {};
    }
    std::string id = p.at(key).get<std::string>();
    if (!sc.find_node(id))
        out.push_back("$.workload.params." + key + ": unknown node '" + id + "'");
    return id;
}

inline std::vector<std::string> wp_node_list(const Scenario& sc, const json& p,
                                             const std::string& key,
                                             std::vector<std::string>& out)
{
    std::vector<std::string> ids;
    if (!p.contains(key) || !p.at(key).is_array() || p.at(key).empty()) {
        out.push_back("$.workload.params." + key + ": missing node list");
        return ids;
    }
    for (const json& e : p.at(key)) {
        if (!e.is_string()) {
            out.push_back("$.workload.params." + key + ": entries must be node ids");
            continue;
        }
        std::string id = e.get<std::string>();
        if (!sc.find_node(id))
            out.push_back("$.workload.params." + key + ": unknown node '" + id + "'");
        ids.push_back(id);
    }
    return ids;
}

inline void validate_workload(const Scenario& sc, std::vector<std::string>& out)
{
    const json& p = sc.workload.params;
    const std::string& kind = sc.workload.kind;
    DurationNs pi_design = sc.sparse.design_precision_ns;

    if (kind == "none")
        return;

    if (kind == "ski_race") {
        std::int64_t start = wp_int(p, "start_at_ns", 0, true, out);
        std::int64_t dur = wp_int(p, "duration_ns", 0, true, out);
        std::int64_t wait = wp_int(p, "exchange_wait_ns", 100'000'000, false, out);
        wp_node_list(sc, p, "start_observers", out);
        wp_node_list(sc, p, "finish_observers", out);
        if (start <= 0 || dur <= 0 || wait <= 0)
            out.push_back("$.workload.params: start_at_ns, duration_ns and exchange_wait_ns "
                          "must be positive");
        else if (start + dur + wait > sc.horizon_ns)
            out.push_back("$.workload.params: race does not finish before the horizon");
        return;
    }
    if (kind == "grid_snapshot") {
        std::int64_t at = wp_int(p, "sample_at_global_ns", 0, true, out);
        std::int64_t validity = wp_int(p, "validity_ns", 0, true, out);
        if (at <= 0 || at >= sc.horizon_ns)
            out.push_back("$.workload.params.sample_at_global_ns: outside (0, horizon)");
        if (validity <= 0)
            out.push_back("$.workload.params.validity_ns: must be positive");
        return;
    }
    if (kind == "txn_ledger") {
        wp_node_list(sc, p, "clients", out);
        wp_node_list(sc, p, "replicas", out);
        std::int64_t from = wp_int(p, "submit_from_ns", 0, true, out);
        std::int64_t until = wp_int(p, "submit_until_ns", 0, true, out);
        std::int64_t n = wp_int(p, "txns_per_client", 0, true, out);
        if (from <= 0 || until <= from)
            out.push_back("$.workload.params: need 0 < submit_from_ns < submit_until_ns");
        if (n <= 0)
            out.push_back("$.workload.params.txns_per_client: must be positive");
        double dup = p.value("duplicate_prob", 0.0);
        if (dup < 0.0 || dup > 1.0)
            out.push_back("$.workload.params.duplicate_prob: outside [0,1]");
        if (!p.contains("accounts") || !p.at("accounts").is_array() || p.at("accounts").empty())
            out.push_back("$.workload.params.accounts: missing account list");
        return;
    }
    if (kind == "robot_sync") {
        std::string ctl = wp_node(sc, p, "controller", out);
        std::vector<std::string> robots = wp_node_list(sc, p, "robots", out);
        std::int64_t lead = wp_int(p, "lead_ns", 0, true, out);
        std::int64_t period = wp_int(p, "period_ns", 0, true, out);
        std::int64_t count = wp_int(p, "count", 0, true, out);
        if (period <= 0 || count <= 0)
            out.push_back("$.workload.params: period_ns and count must be positive");
        for (const std::string& r : robots) {
            if (ctl.empty() || r.empty())
                continue;
            DurationNs d_max = sc.link_between(ctl, r).d_max_ns;
            if (lead <= d_max + pi_design)
                out.push_back("$.workload.params.lead_ns: must exceed d_max + design "
                              "precision for link " +
                              ctl + "->" + r + " (" + std::to_string(d_max + pi_design) + ")");
        }
        return;
    }
    if (kind == "tdma_control_loop") {
        std::vector<std::string> aligned = wp_node_list(sc, p, "aligned", out);
        wp_node_list(sc, p, "unaligned", out);
        std::int64_t cycle = wp_int(p, "cycle_ns", 0, true, out);
        std::int64_t act_off = wp_int(p, "act_offset_ns", 0, true, out);
        std::int64_t sample_off = wp_int(p, "sample_offset_ns", 0, false, out);
        std::int64_t compute = wp_int(p, "compute_ns", 0, true, out);
        if (!sc.tdma || !sc.medium) {
            out.push_back("$.workload: tdma_control_loop requires $.tdma and $.medium");
            return;
        }
        if (cycle != sc.tdma->round_ns)
            out.push_back("$.workload.params.cycle_ns: must equal the slot round length");
        if (aligned.size() == 3) {
            TdmaSchedule sched = sc.tdma->schedule();
            int s_slot = sched.slot_of(aligned[0]);
            int c_slot = sched.slot_of(aligned[1]);
            if (s_slot < 0 || c_slot < 0) {
                out.push_back("$.workload.params.aligned: sensor and controller must own "
                              "slots in $.tdma");
            } else {
                // each stage must fit before the next stage's start
                DurationNs hop = sc.medium->tx_time_ns + sc.medium->link.d_max_ns + pi_design;
                GlobalNs s_start = sc.tdma->slots[s_slot].offset_ns;
                GlobalNs c_start = sc.tdma->slots[c_slot].offset_ns;
                if (s_start + pi_design < sample_off)
                    out.push_back("$.workload.params.sample_offset_ns: sensor slot opens "
                                  "before the sample is taken");
                if (c_start < s_start + pi_design + hop + compute)
                    out.push_back("$.tdma: controller slot starts before the sensor stage "
                                  "can complete");
                if (act_off < c_start + pi_design + hop)
                    out.push_back("$.workload.params.act_offset_ns: earlier than the "
                                  "controller stage can deliver");
                if (act_off >= cycle)
                    out.push_back("$.workload.params.act_offset_ns: must lie within the cycle");
            }
        }
        return;
    }
    if (kind == "lifesign") {
        std::string prod = wp_node(sc, p, "producer", out);
        std::string mon = wp_node(sc, p, "monitor", out);
        std::int64_t period = wp_int(p, "period_ns", 0, true, out);
        std::int64_t margin = wp_int(p, "margin_ns", 0, true, out);
        std::int64_t misses = wp_int(p, "misses_to_fail", 1, false, out);
        if (period <= 0)
            out.push_back("$.workload.params.period_ns: must be positive");
        if (misses < 1)
            out.push_back("$.workload.params.misses_to_fail: must be >= 1");
        if (!prod.empty() && !mon.empty()) {
            DurationNs d_max = sc.link_between(prod, mon).d_max_ns;
            if (margin < d_max + sc.max_granularity())
                out.push_back("$.workload.params.margin_ns: below d_max + granule; deadline "
                              "checks would race arrivals");
            std::string mode = p.value("mode", std::string{"global"});
            if (mode != "global" && mode != "local_timer")
                out.push_back("$.workload.params.mode: must be global|local_timer");
            if (mode == "local_timer" && !p.contains("local_timeout_ns"))
                out.push_back("$.workload.params.local_timeout_ns: required in "
                              "local_timer mode");
            // the local detector runs whenever a timeout is configured
            if (p.contains("local_timeout_ns")) {
                std::int64_t t_u = wp_int(p, "local_timeout_ns", 0, true, out);
                if (t_u < period + 2 * (d_max + pi_design))
                    out.push_back("$.workload.params.local_timeout_ns: below period + "
                                  "2*(d_max + design precision); would false-alarm");
            }
        }
        return;
    }
    if (kind == "tdma_traffic") {
        if (!sc.tdma || !sc.medium)
            out.push_back("$.workload: tdma_traffic requires $.tdma and $.medium");
        wp_int(p, "start_at_ns", 0, true, out);
        return;
    }
    if (kind == "replay") {
        std::string snd = wp_node(sc, p, "sender", out);
        std::string rcv = wp_node(sc, p, "receiver", out);
        std::string atk = wp_node(sc, p, "attacker", out);
        if (!snd.empty() && (snd == rcv || snd == atk || rcv == atk))
            out.push_back("$.workload.params: sender, receiver and attacker must be distinct");
        std::int64_t w = wp_int(p, "window_ns", 0, true, out);
        if (w <= 0)
            out.push_back("$.workload.params.window_ns: must be positive");
        wp_int(p, "period_ns", 0, true, out);
        wp_int(p, "count", 0, true, out);
        if (!p.contains("replay_delays_ns") || !p.at("replay_delays_ns").is_array() ||
            p.at("replay_delays_ns").empty())
            out.push_back("$.workload.params.replay_delays_ns: missing delay list");
        return;
    }
    if (kind == "log_merge") {
        std::int64_t events = wp_int(p, "events", 0, true, out);
        std::int64_t gmin = wp_int(p, "gap_min_ns", 0, true, out);
        std::int64_t gmax = wp_int(p, "gap_max_ns", 0, true, out);
        if (events <= 0)
            out.push_back("$.workload.params.events: must be positive");
        if (gmin <= 0 || gmax < gmin)
            out.push_back("$.workload.params: need 0 < gap_min_ns <= gap_max_ns");
        if (p.contains("sources"))
            wp_node_list(sc, p, "sources", out);
        return;
    }
    out.push_back("$.workload.kind: unknown kind '" + kind + "'");
}

} // namespace detail

inline std::vector<std::string> validate(const Scenario& sc)
{
    std::vector<std::string> out;
    const std::int64_t g_max = sc.max_granularity();

    if (sc.name.empty())
        out.push_back("$.name: missing");
    if (sc.horizon_ns <= 0)
        out.push_back("$.horizon_ns: must be positive");
    if (sc.nodes.empty())
        out.push_back("$.nodes: roster is empty");

    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < sc.nodes.size(); ++i) {
        const NodeSpec& n = sc.nodes[i];
        std::string at = "$.nodes[" + std::to_string(i) + "]";
        if (n.id.empty())
            out.push_back(at + ".id: empty");
        if (++ids[n.id] > 1)
            out.push_back(at + ".id: duplicate '" + n.id + "'");
        if (n.granularity_ns < 1)
            out.push_back(at + ".granularity_ns: must be >= 1");
        if (sc.rho_max_ppb > 0 && std::abs(n.drift_ppb) > sc.rho_max_ppb)
            out.push_back(at + ".drift_ppb: exceeds declared rho_max_ppb");
        if (n.guardian != "none" && n.guardian != "shared" && n.guardian != "own")
            out.push_back(at + ".guardian: must be none|shared|own");
    }

    detail::check_link(sc.default_link, "$.default_link", out);
    for (std::size_t i = 0; i < sc.link_overrides.size(); ++i) {
        const LinkOverride& o = sc.link_overrides[i];
        std::string at = "$.link_overrides[" + std::to_string(i) + "]";
        detail::check_link(o.link, at + ".link", out);
        if (o.src != "*" && !sc.find_node(o.src))
            out.push_back(at + ".src: unknown node '" + o.src + "'");
        if (o.dst != "*" && !sc.find_node(o.dst))
            out.push_back(at + ".dst: unknown node '" + o.dst + "'");
    }
    if (sc.medium)
        detail::check_link(sc.medium->link, "$.medium.link", out);
    if (sc.medium && sc.medium->tx_time_ns <= 0)
        out.push_back("$.medium.tx_time_ns: must be positive");

    // sparse time base
    const SparseSpec& sp = sc.sparse;
    DurationNs pi_perm = sp.effective_permitted(g_max);
    DurationNs delta = sp.effective_forbidden();
    if (sp.design_precision_ns <= 0)
        out.push_back("$.sparse.design_precision_ns: must be positive");
    if (pi_perm < g_max)
        out.push_back("$.sparse.permitted_ns: must be >= the coarsest granularity");
    if (delta <= sp.design_precision_ns)
        out.push_back("$.sparse.forbidden_ns: must exceed design_precision_ns");
    if (pi_perm % g_max != 0 || delta % g_max != 0)
        out.push_back("$.sparse: permitted_ns and forbidden_ns must be multiples of the "
                      "coarsest granularity");

    // sync
    const SyncSpec& sy = sc.sync;
    bool internal = sy.mode == SyncMode::internal || sy.mode == SyncMode::combined;
    bool external = sy.mode == SyncMode::external || sy.mode == SyncMode::combined;
    if (sy.mode != SyncMode::none) {
        if (sy.resync_interval_ns <= 0)
            out.push_back("$.sync.resync_interval_ns: must be positive");
        if (sy.max_faulty < 0)
            out.push_back("$.sync.max_faulty: must be >= 0");
        if (sy.reading_error_ns < 0)
            out.push_back("$.sync.reading_error_ns: must be >= 0");
    }
    if (internal) {
        int n = static_cast<int>(sc.nodes.size());
        if (n < 3 * sy.max_faulty + 1)
            out.push_back("$.sync.max_faulty: internal sync needs N >= 3f+1 (N=" +
                          std::to_string(n) + ", f=" + std::to_string(sy.max_faulty) + ")");
        detail::check_link(sy.link, "$.sync.link", out);
        DurationNs floor_eps = detail::reading_error_floor(sy.link, sc.rho_max_ppb, g_max);
        if (sy.reading_error_ns < floor_eps)
            out.push_back("$.sync.reading_error_ns: below the link-induced floor " +
                          std::to_string(floor_eps) +
                          " (jitter/2 + in-flight drift + granule)");
        DurationNs collect = sy.config().effective_collect_ns();
        if (collect <= 0 || collect >= sy.resync_interval_ns)
            out.push_back("$.sync.collect_ns: must lie in (0, resync_interval_ns)");
        LocalNs lo = 0, hi = 0;
        for (const NodeSpec& nsp : sc.nodes) {
            lo = std::min(lo, nsp.initial_offset_ns);
            hi = std::max(hi, nsp.initial_offset_ns);
        }
        if (collect < (hi - lo) + sy.link.d_max_ns + sp.design_precision_ns)
            out.push_back("$.sync.collect_ns: shorter than initial clock spread + sync-link "
                          "d_max + design precision; estimates would miss the window");
    }
    if (external) {
        if (!sy.external)
            out.push_back("$.sync.external: required for external/combined mode");
        else {
            const ExternalSyncSpec& e = *sy.external;
            std::string at = "$.sync.external";
            if (e.period_ns <= 0)
                out.push_back(at + ".period_ns: must be positive");
            if (e.accuracy_ns < 0)
                out.push_back(at + ".accuracy_ns: must be >= 0");
            detail::check_link(e.link, at + ".link", out);
            for (std::size_t i = 0; i < e.availability.size(); ++i)
                if (e.availability[i].from >= e.availability[i].until)
                    out.push_back(at + ".availability[" + std::to_string(i) +
                                  "]: empty window");
        }
    }

    // TDMA schedule under clock disagreement
    if (sc.tdma) {
        if (!sc.medium)
            out.push_back("$.tdma: requires $.medium (the shared communication resource)");
        TdmaSchedule sched = sc.tdma->schedule();
        DurationNs tx = sc.medium ? sc.medium->tx_time_ns : 0;
        for (std::string& e : sched.validate(sp.design_precision_ns, g_max, tx))
            out.push_back("$." + e);
        for (std::size_t i = 0; i < sc.tdma->slots.size(); ++i)
            if (!sc.find_node(sc.tdma->slots[i].owner))
                out.push_back("$.tdma.slots[" + std::to_string(i) + "].owner: unknown node '" +
                              sc.tdma->slots[i].owner + "'");
    }

    // faults
    for (std::size_t i = 0; i < sc.faults.size(); ++i) {
        const FaultSpec& f = sc.faults[i];
        std::string at = "$.faults[" + std::to_string(i) + "]";
        if (!sc.find_node(f.target))
            out.push_back(at + ".target: unknown node '" + f.target + "'");
        if (f.kind != "crash" && f.kind != "babbling" && f.kind != "clock_drift_step" &&
            f.kind != "clock_freeze")
            out.push_back(at + ".kind: unknown fault kind '" + f.kind + "'");
        if (f.from_ns >= f.until_ns)
            out.push_back(at + ": empty fault window");
        if (f.kind == "babbling" && f.babble_period_ns <= 0)
            out.push_back(at + ".babble_period_ns: must be positive for babbling");
    }
    for (std::size_t i = 0; i < sc.faults.size(); ++i) {
        if (sc.faults[i].kind == "babbling" && !sc.medium)
            out.push_back("$.faults[" + std::to_string(i) +
                          "]: babbling needs $.medium to babble onto");
    }
    // contradictory overlaps on one target: crash vs anything, babbling vs
    // babbling, clock fault vs clock fault
    for (std::size_t i = 0; i < sc.faults.size(); ++i) {
        for (std::size_t j = i + 1; j < sc.faults.size(); ++j) {
            const FaultSpec& a = sc.faults[i];
            const FaultSpec& b = sc.faults[j];
            if (a.target != b.target)
                continue;
            bool overlap = a.from_ns < b.until_ns && b.from_ns < a.until_ns;
            if (!overlap)
                continue;
            bool clock_a = a.kind == "clock_drift_step" || a.kind == "clock_freeze";
            bool clock_b = b.kind == "clock_drift_step" || b.kind == "clock_freeze";
            bool contradictory = a.kind == "crash" || b.kind == "crash" ||
                                 (a.kind == "babbling" && b.kind == "babbling") ||
                                 (clock_a && clock_b);
            if (contradictory)
                out.push_back("$.faults[" + std::to_string(i) + "],[" + std::to_string(j) +
                              "]: contradictory overlapping faults on '" + a.target + "'");
        }
    }

    detail::validate_workload(sc, out);

    return out;
}

// ---------------------------------------------------------------------------
// Loading

inline Scenario parse_scenario(const json& j)
{
    return j.get<Scenario>();
}

inline Scenario parse_scenario_text(const std::string& text)
{
    return parse_scenario(json::parse(text)); // parse errors report line/byte positions
}

inline Scenario load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

inline std::string serialize_scenario(const Scenario& sc)
{
    json j = sc;
    return j.dump(2) + "\n";
}

} // namespace sostime
