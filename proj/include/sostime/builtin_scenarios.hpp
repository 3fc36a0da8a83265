#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sostime/scenario.hpp"

namespace sostime {

/// Built-in scenario catalog. Each entry is a complete, validated
/// configuration; `sostime run --scenario <name>` accepts these names as
/// well as file paths.
namespace builtin {

/// Field-bus profile shared by most workloads: crystal-grade clocks
/// (|drift| up to 1e-4), a dedicated low-jitter sync channel, resync every
/// 100 ms with one tolerated fault.
namespace fieldbus {
inline constexpr Ppb rho_max = 100'000;
inline constexpr DurationNs resync = 100'000'000;
inline constexpr DurationNs epsilon = 1'100;
inline constexpr DurationNs pi_design = 25'000;
inline const LinkSpec sync_link{10'006, 12'000, 0.0};
inline const LinkSpec data_link{10'000, 12'000, 0.0};

inline SyncSpec sync(int max_faulty)
{
    SyncSpec s;
    s.mode = SyncMode::internal;
    s.resync_interval_ns = resync;
    s.max_faulty = max_faulty;
    s.reading_error_ns = epsilon;
    // corrections fire shortly after the readings they are computed from:
    // a long collection window would let the clocks drift away from the
    // snapshot the correction describes. 200 us still admits readings from
    // peers offset by up to ~180 us.
    s.collect_ns = 200'000;
    s.link = sync_link;
    return s;
}

inline SparseSpec sparse()
{
    SparseSpec sp;
    sp.permitted_ns = 25'000;
    sp.forbidden_ns = 50'000;
    sp.design_precision_ns = pi_design;
    return sp;
}
} // namespace fieldbus

inline Scenario ski_race()
{
    Scenario sc;
    sc.name = "ski_race";
    sc.horizon_ns = 81'000'000'000;
    sc.seed = 1;
    sc.rho_max_ppb = fieldbus::rho_max;
    sc.nodes = {
        {"cs_a", 100'000, 1, 50'000},
        {"cs_b", -100'000, 1, -50'000},
        {"cs_c", 40'000, 1, 20'000},
        {"cs_d", -40'000, 1, -20'000},
    };
    sc.default_link = fieldbus::data_link;
    sc.sync = fieldbus::sync(1);
    sc.sparse = fieldbus::sparse();
    sc.workload.kind = "ski_race";
    sc.workload.params = {
        {"start_at_ns", 2'000'000'000},
        {"duration_ns", 77'777'777'777},
        {"exchange_wait_ns", 100'000'000},
        {"start_observers", json::array({"cs_a", "cs_c"})},
        {"finish_observers", json::array({"cs_b", "cs_d"})},
    };
    return sc;
}

inline Scenario grid_snapshot()
{
    Scenario sc;
    sc.name = "grid_snapshot";
    sc.horizon_ns = 4'000'000'000;
    sc.seed = 2;
    sc.rho_max_ppb = fieldbus::rho_max;
    const Ppb drifts[8] = {100'000, -100'000, 70'000, -70'000, 40'000, -40'000, 10'000, -10'000};
    const LocalNs offs[8] = {50'000, -50'000, 35'000, -35'000, 20'000, -20'000, 5'000, -5'000};
    for (int i = 0; i < 8; ++i)
        sc.nodes.push_back({"cs_" + std::to_string(i + 1), drifts[i], 10, offs[i]});
    sc.default_link = fieldbus::data_link;
    sc.sync = fieldbus::sync(1);
    sc.sparse = fieldbus::sparse();
    sc.workload.kind = "grid_snapshot";
    sc.workload.params = {
        {"sample_at_global_ns", 3'000'000'000},
        {"validity_ns", 500'000'000},
        {"probe_after_ns", json::array({100'000'000, 600'000'000})},
    };
    return sc;
}

inline Scenario txn_ledger()
{
    Scenario sc;
    sc.name = "txn_ledger";
    sc.horizon_ns = 10'000'000'000;
    sc.seed = 3;
    sc.rho_max_ppb = fieldbus::rho_max;
    sc.nodes = {
        {"c_1", 100'000, 1, 50'000},  {"c_2", -100'000, 1, -50'000},
        {"c_3", 60'000, 1, 30'000},   {"c_4", -60'000, 1, -30'000},
        {"r_1", 20'000, 1, 10'000},   {"r_2", -20'000, 1, -10'000},
    };
    sc.default_link = fieldbus::data_link;
    sc.sync = fieldbus::sync(1);
    sc.sparse = fieldbus::sparse();
    sc.workload.kind = "txn_ledger";
    sc.workload.params = {
        {"clients", json::array({"c_1", "c_2", "c_3", "c_4"})},
        {"replicas", json::array({"r_1", "r_2"})},
        {"submit_from_ns", 1'000'000'000},
        {"submit_until_ns", 9'000'000'000},
        {"txns_per_client", 40},
        {"duplicate_prob", 0.3},
        {"accounts", json::array({"acct_a", "acct_b"})},
        {"initial_balance", 1'000},
        {"max_amount", 100},
    };
    return sc;
}

inline Scenario robot_sync()
{
    Scenario sc;
    sc.name = "robot_sync";
    sc.horizon_ns = 7'000'000'000;
    sc.seed = 4;
    sc.rho_max_ppb = fieldbus::rho_max;
    sc.nodes = {
        {"ctl", 100'000, 1, 50'000},
        {"bot_a", -100'000, 1, -50'000},
        {"bot_b", 50'000, 1, 25'000},
    };
    sc.default_link = fieldbus::data_link;
    // set-point distribution rides a jittery plant network; only the sync
    // channel is tight
    sc.link_overrides = {
        {"ctl", "bot_a", {5'000'000, 15'000'000, 0.0}},
        {"ctl", "bot_b", {5'000'000, 15'000'000, 0.0}},
    };
    sc.sync = fieldbus::sync(0);
    sc.sparse = fieldbus::sparse();
    sc.workload.kind = "robot_sync";
    sc.workload.params = {
        {"controller", "ctl"},
        {"robots", json::array({"bot_a", "bot_b"})},
        {"start_at_ns", 1'000'000'000},
        {"period_ns", 100'000'000},
        {"count", 50},
        {"lead_ns", 50'000'000},
    };
    return sc;
}

inline Scenario tdma_control_loop()
{
    Scenario sc;
    sc.name = "tdma_control_loop";
    sc.horizon_ns = 7'000'000'000;
    sc.seed = 5;
    sc.rho_max_ppb = fieldbus::rho_max;
    sc.nodes = {
        {"s_a", 100'000, 1, 50'000},  {"c_a", -100'000, 1, -50'000},
        {"a_a", 60'000, 1, 30'000},   {"s_u", -60'000, 1, -30'000},
        {"c_u", 30'000, 1, 15'000},   {"a_u", -30'000, 1, -15'000},
    };
    sc.default_link = fieldbus::data_link;
    // the event-driven pipeline rides jittery point-to-point links
    sc.link_overrides = {
        {"s_u", "c_u", {100'000, 1'100'000, 0.0}},
        {"c_u", "a_u", {100'000, 1'100'000, 0.0}},
    };
    sc.medium = MediumSpec{1'000'000, {1'000, 2'000, 0.0}};
    sc.sync = fieldbus::sync(1);
    sc.sparse = fieldbus::sparse();
    sc.tdma = TdmaSpec{100'000'000,
                       0,
                       {{"s_a", 5'000'000, 5'000'000}, {"c_a", 20'000'000, 5'000'000}}};
    sc.workload.kind = "tdma_control_loop";
    sc.workload.params = {
        {"aligned", json::array({"s_a", "c_a", "a_a"})},
        {"unaligned", json::array({"s_u", "c_u", "a_u"})},
        {"start_at_ns", 1'000'000'000},
        {"cycle_ns", 100'000'000},
        {"cycles", 50},
        {"sample_offset_ns", 0},
        {"compute_ns", 2'000'000},
        {"act_offset_ns", 40'000'000},
    };
    return sc;
}

inline Scenario lifesign_watch()
{
    Scenario sc;
    sc.name = "lifesign_watch";
    sc.horizon_ns = 8'000'000'000;
    sc.seed = 6;
    sc.rho_max_ppb = 5'000; // oven-stabilized oscillators
    sc.nodes = {
        {"prod", 5'000, 1, 200},
        {"mon", -5'000, 1, -200},
        {"aux_1", 3'000, 1, 150},
        {"aux_2", -3'000, 1, -100},
    };
    sc.default_link = {29'000, 30'000, 0.0};
    SyncSpec sy;
    sy.mode = SyncMode::combined;
    sy.resync_interval_ns = 100'000'000;
    sy.max_faulty = 1;
    sy.reading_error_ns = 5;
    sy.link = {10'000, 10'002, 0.0};
    ExternalSyncSpec ext;
    ext.period_ns = 10'000'000;
    ext.accuracy_ns = 100;
    ext.link = {5'000, 5'020, 0.0};
    sy.external = ext;
    sc.sync = sy;
    sc.sparse = SparseSpec{2'000, 4'000, 0, 2'000};
    sc.workload.kind = "lifesign";
    sc.workload.params = {
        {"producer", "prod"},      {"monitor", "mon"},
        {"start_at_ns", 1'000'000'000}, {"period_ns", 100'000'000},
        {"margin_ns", 31'000},     {"misses_to_fail", 1},
        {"mode", "global"},        {"local_timeout_ns", 100'064'000},
    };
    sc.faults = {{"prod", "crash", 6'050'000'000, 8'000'000'000}};
    return sc;
}

inline Scenario babbling_idiot()
{
    Scenario sc;
    sc.name = "babbling_idiot";
    sc.horizon_ns = 8'000'000'000;
    sc.seed = 7;
    sc.rho_max_ppb = fieldbus::rho_max;
    sc.nodes = {
        {"n_1", 100'000, 1, 50'000, "own", 30'000, 10'000},
        {"n_2", -100'000, 1, -50'000, "own", -30'000, -10'000},
        {"n_3", 50'000, 1, 25'000, "own", 20'000, 5'000},
        {"n_4", -50'000, 1, -25'000, "own", -20'000, -5'000},
    };
    sc.default_link = fieldbus::data_link;
    sc.medium = MediumSpec{100'000, {1'000, 2'000, 0.0}};
    sc.sync = fieldbus::sync(1);
    sc.sparse = fieldbus::sparse();
    sc.tdma = TdmaSpec{4'000'000,
                       0,
                       {{"n_1", 0, 900'000},
                        {"n_2", 1'000'000, 900'000},
                        {"n_3", 2'000'000, 900'000},
                        {"n_4", 3'000'000, 900'000}}};
    sc.workload.kind = "tdma_traffic";
    sc.workload.params = {{"start_at_ns", 1'000'000'000}};
    sc.faults = {{"n_4", "babbling", 2'000'000'000, 6'000'000'000, 0, 300'000}};
    return sc;
}

inline Scenario replay_attack()
{
    Scenario sc;
    sc.name = "replay_attack";
    sc.horizon_ns = 5'000'000'000;
    sc.seed = 8;
    sc.rho_max_ppb = fieldbus::rho_max;
    sc.nodes = {
        {"alice", 100'000, 1, 50'000},
        {"bob", -100'000, 1, -50'000},
        {"eve", 50'000, 1, 25'000},
        {"aux", -50'000, 1, -25'000},
    };
    sc.default_link = fieldbus::data_link;
    sc.sync = fieldbus::sync(1);
    sc.sparse = fieldbus::sparse();
    sc.workload.kind = "replay";
    sc.workload.params = {
        {"sender", "alice"},
        {"receiver", "bob"},
        {"attacker", "eve"},
        {"start_at_ns", 1'000'000'000},
        {"period_ns", 100'000'000},
        {"count", 20},
        {"window_ns", 500'000'000},
        {"replay_delays_ns", json::array({100'000'000, 450'000'000, 600'000'000,
                                          1'000'000'000})},
    };
    return sc;
}

inline Scenario log_merge()
{
    Scenario sc;
    sc.name = "log_merge";
    sc.horizon_ns = 2'000'000'000;
    sc.seed = 9;
    sc.rho_max_ppb = fieldbus::rho_max;
    sc.nodes = {
        {"cs_1", 100'000, 1, 2'000'000},
        {"cs_2", -100'000, 1, -2'000'000},
        {"cs_3", 60'000, 1, 1'200'000},
        {"cs_4", -60'000, 1, -1'200'000},
        {"cs_5", 20'000, 1, 400'000},
    };
    sc.default_link = fieldbus::data_link;
    sc.sync = fieldbus::sync(1);
    // millisecond starting offsets need a wide capture window, which in turn
    // staples ~0.4 us of drift-while-waiting onto every reading
    sc.sync.collect_ns = 4'200'000;
    sc.sync.reading_error_ns = 1'600;
    sc.sparse = fieldbus::sparse();
    sc.workload.kind = "log_merge";
    sc.workload.params = {
        {"start_at_ns", 1'000'000'000},
        {"events", 100},
        {"gap_min_ns", 10'000},
        {"gap_max_ns", 300'000},
    };
    return sc;
}

inline Scenario combined_sync()
{
    Scenario sc;
    sc.name = "combined_sync";
    sc.horizon_ns = 10'000'000'000;
    sc.seed = 10;
    sc.rho_max_ppb = 10;
    sc.nodes = {
        {"cs_1", 10, 1, 200},
        {"cs_2", -10, 1, -200},
        {"cs_3", 7, 1, 150},
        {"cs_4", -3, 1, -100},
    };
    sc.default_link = {10'000, 10'002, 0.0};
    SyncSpec sy;
    sy.mode = SyncMode::combined;
    sy.resync_interval_ns = 100'000'000;
    sy.max_faulty = 1;
    sy.reading_error_ns = 3;
    sy.link = {10'000, 10'002, 0.0};
    ExternalSyncSpec ext;
    ext.period_ns = 10'000'000;
    ext.accuracy_ns = 100;
    ext.link = {5'000, 5'020, 0.0};
    ext.availability = {{0, 4'000'000'000}, {6'000'000'000, 10'000'000'000}};
    sy.external = ext;
    sc.sync = sy;
    sc.sparse = SparseSpec{250, 500, 0, 250};
    sc.workload.kind = "none";
    return sc;
}

} // namespace builtin

inline std::vector<std::string> builtin_scenario_names()
{
    return {"ski_race",      "grid_snapshot",   "txn_ledger",   "robot_sync",
            "tdma_control_loop", "lifesign_watch", "babbling_idiot", "replay_attack",
            "log_merge",     "combined_sync"};
}

inline Scenario builtin_scenario(const std::string& name)
{
    if (name == "ski_race")
        return builtin::ski_race();
    if (name == "grid_snapshot")
        return builtin::grid_snapshot();
    if (name == "txn_ledger")
        return builtin::txn_ledger();
    if (name == "robot_sync")
        return builtin::robot_sync();
    if (name == "tdma_control_loop")
        return builtin::tdma_control_loop();
    if (name == "lifesign_watch")
        return builtin::lifesign_watch();
    if (name == "babbling_idiot")
        return builtin::babbling_idiot();
    if (name == "replay_attack")
        return builtin::replay_attack();
    if (name == "log_merge")
        return builtin::log_merge();
    if (name == "combined_sync")
        return builtin::combined_sync();
    throw std::invalid_argument("unknown built-in scenario: " + name);
}

/// Resolve a --scenario argument: a built-in name or a JSON file path.
inline Scenario resolve_scenario(const std::string& name_or_path)
{
    for (const std::string& n : builtin_scenario_names())
        if (n == name_or_path)
            return builtin_scenario(n);
    return load_scenario_file(name_or_path);
}

} // namespace sostime
