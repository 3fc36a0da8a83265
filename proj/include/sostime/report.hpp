#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sostime/time.hpp"
#include "sostime/trace.hpp"

namespace sostime {

using json = nlohmann::json;

/// Render a duration (or instant) for humans: picks the widest unit that
/// keeps the number short, with up to three significant decimals.
inline std::string fmt_ns(double ns)
{
    const char* unit = "ns";
    double v = ns;
    double a = std::abs(ns);
    if (a >= 1e9) {
        v = ns / 1e9;
        unit = "s";
    } else if (a >= 1e6) {
        v = ns / 1e6;
        unit = "ms";
    } else if (a >= 1e3) {
        v = ns / 1e3;
        unit = "us";
    }
    std::ostringstream os;
    if (v == std::floor(v) && std::abs(v) < 1e15)
        os << static_cast<std::int64_t>(v);
    else {
        os.precision(3);
        os << std::fixed << v;
        std::string s = os.str();
        while (!s.empty() && s.back() == '0')
            s.pop_back();
        if (!s.empty() && s.back() == '.')
            s.pop_back();
        return s + " " + unit;
    }
    return os.str() + " " + unit;
}

/// One polyline on a chart.
struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points; ///< (x ns, y ns)
};

namespace detail {

inline std::string svg_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

inline std::string num(double v)
{
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

} // namespace detail

/// Self-contained SVG line chart: one or more series over a shared x axis,
/// with an optional horizontal reference rule (e.g. a design bound). No
/// external assets; safe to embed next to a markdown report.
inline std::string svg_line_chart(const std::string& title,
                                  const std::vector<ChartSeries>& series,
                                  std::optional<double> rule_y = std::nullopt,
                                  const std::string& rule_label = {})
{
    const double width = 760, height = 320;
    const double left = 86, right = 20, top = 38, bottom = 46;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    static const char* palette[] = {"#2563eb", "#dc2626", "#059669", "#d97706"};

    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    bool have = false;
    for (const ChartSeries& s : series)
        for (auto [x, y] : s.points) {
            if (!have) {
                x_min = x_max = x;
                y_min = y_max = y;
                have = true;
            }
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    if (rule_y) {
        if (!have) {
            y_min = y_max = *rule_y;
            have = true;
        }
        y_min = std::min(y_min, *rule_y);
        y_max = std::max(y_max, *rule_y);
    }
    y_min = std::min(y_min, 0.0);
    if (x_max == x_min)
        x_max = x_min + 1;
    if (y_max == y_min)
        y_max = y_min + 1;
    y_max *= 1.06; // headroom so the top of the data is not clipped

    auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto sy = [&](double y) { return top + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-size=\"15\">" << detail::svg_escape(title) << "</text>\n";

    // gridlines and tick labels
    for (int i = 0; i <= 4; ++i) {
        double fy = y_min + (y_max - y_min) * i / 4;
        double py = sy(fy);
        svg << "<line x1=\"" << left << "\" y1=\"" << detail::num(py) << "\" x2=\""
            << left + plot_w << "\" y2=\"" << detail::num(py)
            << "\" stroke=\"#e5e7eb\"/>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << detail::num(py + 4)
            << "\" text-anchor=\"end\">" << fmt_ns(fy) << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        double fx = x_min + (x_max - x_min) * i / 4;
        double px = sx(fx);
        svg << "<line x1=\"" << detail::num(px) << "\" y1=\"" << top << "\" x2=\""
            << detail::num(px) << "\" y2=\"" << top + plot_h
            << "\" stroke=\"#f3f4f6\"/>\n";
        svg << "<text x=\"" << detail::num(px) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << fmt_ns(fx) << "</text>\n";
    }
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#9ca3af\"/>\n";

    if (rule_y) {
        double py = sy(*rule_y);
        svg << "<line x1=\"" << left << "\" y1=\"" << detail::num(py) << "\" x2=\""
            << left + plot_w << "\" y2=\"" << detail::num(py)
            << "\" stroke=\"#9333ea\" stroke-dasharray=\"6 4\"/>\n";
        if (!rule_label.empty())
            svg << "<text x=\"" << left + plot_w - 4 << "\" y=\""
                << detail::num(py - 5) << "\" text-anchor=\"end\" fill=\"#9333ea\">"
                << detail::svg_escape(rule_label) << "</text>\n";
    }

    int color = 0;
    for (const ChartSeries& s : series) {
        if (s.points.empty())
            continue;
        const char* stroke = palette[color % 4];
        svg << "<polyline fill=\"none\" stroke=\"" << stroke
            << "\" stroke-width=\"1.5\" points=\"";
        for (auto [x, y] : s.points)
            svg << detail::num(sx(x)) << "," << detail::num(sy(y)) << " ";
        svg << "\"/>\n";
        if (!s.label.empty())
            svg << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 16 * color
                << "\" fill=\"" << stroke << "\">" << detail::svg_escape(s.label)
                << "</text>\n";
        ++color;
    }
    svg << "</svg>\n";
    return svg.str();
}

namespace detail {

inline json load_json_file(const std::filesystem::path& p)
{
    std::ifstream f(p);
    if (!f)
        throw std::runtime_error("cannot open " + p.string());
    return json::parse(f);
}

inline void write_file(const std::filesystem::path& p, const std::string& body)
{
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot write " + p.string());
    f << body;
}

inline std::string md_row(const std::string& k, const std::string& v)
{
    return "| " + k + " | " + v + " |\n";
}

} // namespace detail

/// Build report.md (plus SVG charts) from the artifacts a run left in
/// `out_dir` — at minimum metrics.json; trace.csv enriches the report when
/// present. Returns the path of the generated report. A run with no
/// precision windows or samples still yields a valid (sparser) report.
inline std::string write_report(const std::string& out_dir)
{
    namespace fs = std::filesystem;
    fs::path dir(out_dir);
    json m = detail::load_json_file(dir / "metrics.json");

    std::ostringstream md;
    md << "# Run report: " << m.value("scenario", std::string("?")) << "\n\n";
    md << "Seed " << m.value("seed", 0ull) << ", horizon "
       << fmt_ns(static_cast<double>(m.value("horizon_ns", std::int64_t{0}))) << ".\n\n";

    // -- global time base ---------------------------------------------------
    const json& sp = m.at("sparse");
    std::int64_t cycle = sp.value("cycle_ns", std::int64_t{0});
    md << "## Global time base\n\n";
    md << "| quantity | value |\n|---|---|\n";
    md << detail::md_row("permitted interval",
                         fmt_ns(static_cast<double>(sp.value("permitted_ns", std::int64_t{0}))));
    md << detail::md_row("forbidden interval",
                         fmt_ns(static_cast<double>(sp.value("forbidden_ns", std::int64_t{0}))));
    md << detail::md_row("granule (cycle)", fmt_ns(static_cast<double>(cycle)) + " = " +
                                                std::to_string(cycle) + " ns");
    md << detail::md_row("design precision",
                         std::to_string(sp.value("design_precision_ns", std::int64_t{0})) +
                             " ns");
    md << "\n";

    // -- precision ----------------------------------------------------------
    const json& pr = m.at("precision");
    std::int64_t max_pi = pr.value("max_pi_ns", std::int64_t{-1});
    std::int64_t steady_pi = pr.value("steady_pi_ns", std::int64_t{-1});
    md << "## Precision\n\n";
    if (steady_pi >= 0) {
        md << "Measured precision (steady state, from "
           << fmt_ns(static_cast<double>(pr.value("steady_from_ns", std::int64_t{0})))
           << " on): **" << steady_pi << " ns**";
        if (cycle > 0)
            md << " — supporting the " << std::to_string(cycle)
               << " ns granule above" << (steady_pi < sp.value("forbidden_ns", std::int64_t{0})
                                              ? " (below the forbidden interval)"
                                              : "");
        md << ".\n\nWorst window anywhere in the run: " << max_pi << " ns.\n\n";
    } else {
        md << "No precision windows were recorded (fewer than two measurable "
              "clocks, or the run ended before the steady region).\n\n";
    }
    std::vector<ChartSeries> pi_series(1);
    pi_series[0].label = "window max pairwise difference";
    if (pr.contains("series"))
        for (const json& w : pr.at("series"))
            pi_series[0].points.push_back(
                {static_cast<double>(w.value("to_ns", std::int64_t{0})),
                 static_cast<double>(w.value("pi_ns", std::int64_t{0}))});
    if (!pi_series[0].points.empty()) {
        std::optional<double> rule;
        std::int64_t design = sp.value("design_precision_ns", std::int64_t{0});
        if (design > 0)
            rule = static_cast<double>(design);
        detail::write_file(dir / "precision.svg",
                           svg_line_chart("Ensemble precision over the run", pi_series,
                                          rule, "design precision"));
        md << "![precision](precision.svg)\n\n";
    }

    // -- accuracy -----------------------------------------------------------
    const json& ac = m.at("accuracy");
    std::int64_t max_up = ac.value("max_while_up_ns", std::int64_t{-1});
    if (!ac.at("samples").empty()) {
        md << "## Accuracy\n\n";
        if (max_up >= 0)
            md << "Worst offset from the reference while the time server was "
                  "reachable (steady state): **"
               << max_up << " ns**.\n\n";
        ChartSeries s;
        s.label = "worst clock offset from reference";
        for (const json& a : ac.at("samples"))
            s.points.push_back(
                {static_cast<double>(a.value("ref_ns", std::int64_t{0})),
                 static_cast<double>(a.value("max_abs_offset_ns", std::int64_t{0}))});
        detail::write_file(dir / "accuracy.svg",
                           svg_line_chart("External accuracy over the run", {s}));
        md << "![accuracy](accuracy.svg)\n\n";
    }

    // -- sync / comms counters ----------------------------------------------
    const json& sy = m.at("sync");
    const json& co = m.at("comms");
    md << "## Synchronization and traffic\n\n";
    md << "| counter | value |\n|---|---|\n";
    md << detail::md_row("sync rounds applied",
                         std::to_string(sy.value("rounds_applied", std::int64_t{0})));
    md << detail::md_row("sync rounds degraded (no quorum)",
                         std::to_string(sy.value("rounds_degraded", std::int64_t{0})));
    md << detail::md_row("external corrections",
                         std::to_string(sy.value("ext_corrections", std::int64_t{0})));
    md << detail::md_row("external polls while server down",
                         std::to_string(sy.value("ext_unavailable", std::int64_t{0})));
    md << detail::md_row("messages sent / delivered / lost",
                         std::to_string(co.value("sent", std::int64_t{0})) + " / " +
                             std::to_string(co.value("delivered", std::int64_t{0})) + " / " +
                             std::to_string(co.value("lost", std::int64_t{0})));
    md << detail::md_row("medium collisions",
                         std::to_string(co.value("collisions", std::int64_t{0})));
    md << detail::md_row("guardian blocks",
                         std::to_string(co.value("guardian_blocks", std::int64_t{0})));
    md << detail::md_row("deadline misses",
                         std::to_string(co.value("deadline_misses", std::int64_t{0})));
    md << "\n";

    // -- workload -----------------------------------------------------------
    const json& wl = m.at("workload");
    if (!wl.empty()) {
        md << "## Workload\n\n";
        // dead-time comparison gets a chart; everything else a key table
        if (wl.contains("aligned") && wl.contains("unaligned")) {
            std::vector<ChartSeries> dt(2);
            dt[0].label = "phase-aligned dead time";
            dt[1].label = "event-driven dead time";
            for (const json& v : wl.at("aligned").at("series"))
                dt[0].points.push_back({v.at("n").get<double>(),
                                        v.at("ns").get<double>()});
            for (const json& v : wl.at("unaligned").at("series"))
                dt[1].points.push_back({v.at("n").get<double>(),
                                        v.at("ns").get<double>()});
            detail::write_file(dir / "dead_time.svg",
                               svg_line_chart("Control-loop dead time per cycle", dt));
            md << "Dead time per cycle for the phase-aligned and the "
                  "event-driven output path:\n\n";
            md << "![dead time](dead_time.svg)\n\n";
            md << "| pipeline | cycles | min | max | jitter |\n|---|---|---|---|---|\n";
            for (const char* k : {"aligned", "unaligned"}) {
                const json& g = wl.at(k);
                md << "| " << k << " | " << g.value("count", std::int64_t{0}) << " | "
                   << fmt_ns(static_cast<double>(g.value("min_ns", std::int64_t{0})))
                   << " | "
                   << fmt_ns(static_cast<double>(g.value("max_ns", std::int64_t{0})))
                   << " | "
                   << fmt_ns(static_cast<double>(g.value("jitter_ns", std::int64_t{0})))
                   << " |\n";
            }
            md << "\n";
        } else {
            md << "```json\n" << wl.dump(2) << "\n```\n\n";
        }
    }

    // -- trace summary --------------------------------------------------------
    fs::path trace = dir / "trace.csv";
    if (fs::exists(trace)) {
        std::map<std::string, std::int64_t> kinds;
        for (const TraceRow& r : read_trace(trace.string()))
            ++kinds[r.kind];
        md << "## Trace\n\n";
        if (kinds.empty()) {
            md << "The trace file is empty.\n\n";
        } else {
            md << "| event kind | rows |\n|---|---|\n";
            for (const auto& [k, n] : kinds)
                md << "| " << k << " | " << n << " |\n";
            md << "\n";
        }
    }

    fs::path out = dir / "report.md";
    detail::write_file(out, md.str());
    return out.string();
}

} // namespace sostime
