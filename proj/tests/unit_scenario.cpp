#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sostime/builtin_scenarios.hpp"
#include "sostime/scenario.hpp"

using namespace sostime;

namespace {

bool has_error_at(const std::vector<std::string>& errs, const std::string& prefix)
{
    for (const std::string& e : errs)
        if (e.rfind(prefix, 0) == 0)
            return true;
    return false;
}

std::string join(const std::vector<std::string>& errs)
{
    std::string out;
    for (const std::string& e : errs)
        out += e + "\n";
    return out;
}

} // namespace

TEST_CASE("every built-in scenario validates cleanly")
{
    for (const std::string& name : builtin_scenario_names()) {
        Scenario sc = builtin_scenario(name);
        INFO(name << ":\n" << join(validate(sc)));
        CHECK(validate(sc).empty());
    }
    CHECK(builtin_scenario_names().size() == 10);
    CHECK_THROWS_AS(builtin_scenario("no_such"), std::invalid_argument);
}

TEST_CASE("serialization round-trips every built-in identically")
{
    for (const std::string& name : builtin_scenario_names()) {
        Scenario sc = builtin_scenario(name);
        std::string text = serialize_scenario(sc);
        Scenario back = parse_scenario_text(text);
        INFO(name);
        CHECK(back == sc);
        // and a second pass is byte-stable
        CHECK(serialize_scenario(back) == text);
    }
}

TEST_CASE("scenario files load from disk and resolve by name or path")
{
    namespace fs = std::filesystem;
    Scenario sc = builtin_scenario("ski_race");
    fs::path p = fs::temp_directory_path() / "sostime_scn_test.json";
    {
        std::ofstream f(p);
        f << serialize_scenario(sc);
    }
    Scenario loaded = load_scenario_file(p.string());
    CHECK(loaded == sc);
    CHECK(resolve_scenario("ski_race") == sc);
    CHECK(resolve_scenario(p.string()) == sc);
    CHECK_THROWS(load_scenario_file("/nonexistent/file.json"));
    fs::remove(p);
}

TEST_CASE("structural validation pinpoints the offending field")
{
    Scenario sc = builtin_scenario("combined_sync");

    SECTION("empty roster")
    {
        sc.nodes.clear();
        CHECK(has_error_at(validate(sc), "$.nodes"));
    }
    SECTION("duplicate ids")
    {
        sc.nodes[1].id = sc.nodes[0].id;
        CHECK(has_error_at(validate(sc), "$.nodes[1].id"));
    }
    SECTION("drift above the declared ceiling")
    {
        sc.nodes[2].drift_ppb = sc.rho_max_ppb + 1;
        CHECK(has_error_at(validate(sc), "$.nodes[2].drift_ppb"));
    }
    SECTION("granularity must be positive")
    {
        sc.nodes[0].granularity_ns = 0;
        CHECK(has_error_at(validate(sc), "$.nodes[0].granularity_ns"));
    }
    SECTION("unknown guardian flavor")
    {
        sc.nodes[0].guardian = "imaginary";
        CHECK(has_error_at(validate(sc), "$.nodes[0].guardian"));
    }
    SECTION("inverted link delays")
    {
        sc.default_link.d_min_ns = 50;
        sc.default_link.d_max_ns = 40;
        CHECK(has_error_at(validate(sc), "$.default_link"));
    }
    SECTION("horizon must be positive")
    {
        sc.horizon_ns = 0;
        CHECK(has_error_at(validate(sc), "$.horizon_ns"));
    }
}

TEST_CASE("sparse base validation enforces the ordering prerequisites")
{
    Scenario sc = builtin_scenario("combined_sync");

    SECTION("forbidden gap must exceed the design precision")
    {
        sc.sparse.forbidden_ns = sc.sparse.design_precision_ns;
        CHECK(has_error_at(validate(sc), "$.sparse.forbidden_ns"));
    }
    SECTION("granule alignment")
    {
        sc.nodes[0].granularity_ns = 7; // permitted/forbidden not multiples of 7
        CHECK(has_error_at(validate(sc), "$.sparse"));
    }
    SECTION("design precision positive")
    {
        sc.sparse.design_precision_ns = 0;
        CHECK(has_error_at(validate(sc), "$.sparse.design_precision_ns"));
    }
}

TEST_CASE("sync validation enforces quorum and the reading-error floor")
{
    Scenario sc = builtin_scenario("combined_sync"); // N=4, f=1

    SECTION("too few members for the fault hypothesis")
    {
        sc.sync.max_faulty = 2; // needs 3f+1 = 7
        CHECK(has_error_at(validate(sc), "$.sync.max_faulty"));
    }
    SECTION("declared reading error below the physical floor")
    {
        sc.sync.reading_error_ns = 0;
        CHECK(has_error_at(validate(sc), "$.sync.reading_error_ns"));
    }
    SECTION("collect window must close before the round ends")
    {
        sc.sync.collect_ns = sc.sync.resync_interval_ns;
        CHECK(has_error_at(validate(sc), "$.sync.collect_ns"));
    }
    SECTION("external mode requires a server block")
    {
        sc.sync.external.reset();
        CHECK(has_error_at(validate(sc), "$.sync.external"));
    }
    SECTION("empty availability windows are rejected")
    {
        sc.sync.external->availability = {{100, 100}};
        CHECK(has_error_at(validate(sc), "$.sync.external.availability"));
    }
}

TEST_CASE("tdma and fault validation")
{
    Scenario sc = builtin_scenario("babbling_idiot");

    SECTION("tdma requires a shared medium")
    {
        sc.medium.reset();
        CHECK(has_error_at(validate(sc), "$.tdma"));
    }
    SECTION("slot owners must exist")
    {
        sc.tdma->slots[0].owner = "ghost";
        CHECK(has_error_at(validate(sc), "$.tdma.slots[0].owner"));
    }
    SECTION("fault target must exist")
    {
        sc.faults[0].target = "ghost";
        CHECK(has_error_at(validate(sc), "$.faults[0].target"));
    }
    SECTION("unknown fault kind")
    {
        sc.faults[0].kind = "gremlins";
        CHECK(has_error_at(validate(sc), "$.faults[0].kind"));
    }
    SECTION("empty fault window")
    {
        sc.faults[0].until_ns = sc.faults[0].from_ns;
        CHECK(has_error_at(validate(sc), "$.faults[0]"));
    }
    SECTION("a crash overlapping another fault on one node is contradictory")
    {
        FaultSpec crash;
        crash.target = sc.faults[0].target;
        crash.kind = "crash";
        crash.from_ns = sc.faults[0].from_ns;
        crash.until_ns = sc.faults[0].until_ns;
        sc.faults.push_back(crash);
        CHECK(has_error_at(validate(sc), "$.faults[0],[1]"));
    }
}

TEST_CASE("workload validation checks roles and timing feasibility")
{
    SECTION("unknown kind")
    {
        Scenario sc = builtin_scenario("ski_race");
        sc.workload.kind = "quantum_darts";
        CHECK(has_error_at(validate(sc), "$.workload.kind"));
    }
    SECTION("observer ids must exist")
    {
        Scenario sc = builtin_scenario("ski_race");
        sc.workload.params["start_observers"] = {"nobody"};
        CHECK(has_error_at(validate(sc), "$.workload.params"));
    }
    SECTION("race must finish before the horizon")
    {
        Scenario sc = builtin_scenario("ski_race");
        sc.horizon_ns = 1'000'000'000;
        CHECK(has_error_at(validate(sc), "$.workload.params"));
    }
    SECTION("set-point lead must cover the worst delivery path")
    {
        Scenario sc = builtin_scenario("robot_sync");
        sc.workload.params["lead_ns"] = 1'000'000; // below d_max + precision
        CHECK(has_error_at(validate(sc), "$.workload.params.lead_ns"));
    }
    SECTION("life-sign margin must cover delivery jitter")
    {
        Scenario sc = builtin_scenario("lifesign_watch");
        sc.workload.params["margin_ns"] = 100;
        CHECK(has_error_at(validate(sc), "$.workload.params.margin_ns"));
    }
    SECTION("local timer must exceed period plus two worst-case hops")
    {
        Scenario sc = builtin_scenario("lifesign_watch");
        sc.workload.params["local_timeout_ns"] = 100'000'000;
        CHECK(has_error_at(validate(sc), "$.workload.params.local_timeout_ns"));
    }
    SECTION("control loop stage offsets must be reachable")
    {
        Scenario sc = builtin_scenario("tdma_control_loop");
        sc.workload.params["act_offset_ns"] = 6'000'000; // before controller slot output
        CHECK(has_error_at(validate(sc), "$."));
    }
}

TEST_CASE("link overrides pick the most specific pair")
{
    Scenario sc = builtin_scenario("robot_sync");
    // ctl->bot_a overridden to the jittery link; unrelated pairs use default
    LinkSpec o = sc.link_between("ctl", "bot_a");
    CHECK(o.d_max_ns > sc.default_link.d_max_ns);
    LinkSpec d = sc.link_between("bot_a", "bot_b");
    CHECK(d.d_max_ns == sc.default_link.d_max_ns);
}

TEST_CASE("parse rejects malformed documents")
{
    CHECK_THROWS(parse_scenario_text("{ not json"));
    CHECK_THROWS(parse_scenario_text("{}")); // roster missing entirely
}
