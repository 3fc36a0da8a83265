#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sostime/builtin_scenarios.hpp"
#include "sostime/report.hpp"
#include "sostime/simulation.hpp"

namespace fs = std::filesystem;
using namespace sostime;

namespace {

int cmd_run(const std::string& scenario_arg, std::uint64_t seed, bool seed_given,
            const std::string& out_dir)
{
    Scenario sc = resolve_scenario(scenario_arg);
    std::uint64_t effective = seed_given ? seed : sc.seed;

    Simulation sim(sc, effective);
    fs::create_directories(out_dir);
    sim.enable_trace((fs::path(out_dir) / "trace.csv").string());
    sim.run();
    sim.write_outputs(out_dir);

    const Metrics& m = sim.metrics();
    std::cout << "ran '" << sc.name << "' seed " << effective << " to "
              << fmt_ns(static_cast<double>(sc.horizon_ns)) << "\n";
    if (m.steady_pi_ns >= 0)
        std::cout << "  steady precision " << m.steady_pi_ns << " ns (worst window "
                  << m.max_pi_ns << " ns, design " << m.design_precision_ns << " ns)\n";
    std::cout << "  artifacts in " << out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& out_dir)
{
    std::string path = write_report(out_dir);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_list()
{
    for (const std::string& name : builtin_scenario_names()) {
        Scenario sc = builtin_scenario(name);
        std::cout << name << "  (" << sc.nodes.size() << " nodes, "
                  << fmt_ns(static_cast<double>(sc.horizon_ns)) << ", workload "
                  << sc.workload.kind << ")\n";
    }
    return 0;
}

int cmd_validate(const std::string& scenario_arg)
{
    Scenario sc = resolve_scenario(scenario_arg);
    std::vector<std::string> problems = validate(sc);
    if (problems.empty()) {
        std::cout << "'" << sc.name << "' is valid\n";
        return 0;
    }
    for (const std::string& p : problems)
        std::cerr << p << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"deterministic global-time simulation toolkit"};
    app.require_subcommand(1);

    std::string scenario_arg, out_dir;
    std::uint64_t seed = 0;

    CLI::App* run = app.add_subcommand("run", "execute a scenario and write artifacts");
    run->add_option("--scenario", scenario_arg, "built-in name or JSON file path")
        ->required();
    CLI::Option* seed_opt =
        run->add_option("--seed", seed, "override the scenario's seed");
    run->add_option("--out", out_dir, "output directory")->required();

    CLI::App* report =
        app.add_subcommand("report", "render report.md from a run's output directory");
    report->add_option("--out", out_dir, "directory holding metrics.json")->required();

    app.add_subcommand("list-scenarios", "list the built-in scenario catalog");

    CLI::App* val = app.add_subcommand("validate", "check a scenario configuration");
    val->add_option("--scenario", scenario_arg, "built-in name or JSON file path")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario_arg, seed, seed_opt->count() > 0, out_dir);
        if (report->parsed())
            return cmd_report(out_dir);
        if (val->parsed())
            return cmd_validate(scenario_arg);
        return cmd_list();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
