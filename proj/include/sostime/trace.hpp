#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sostime/time.hpp"

namespace sostime {

/// CSV event trace with a fixed header:
///
///     ref_time_ns,cs_id,event_kind,detail
///
/// detail is a semicolon-separated key=value list; all values are integers
/// or fixed identifiers, so a run's trace is byte-identical across re-runs
/// with the same (config, seed).
class TraceWriter {
public:
    TraceWriter() = default;

    void open(const std::string& path)
    {
        std::filesystem::path p(path);
        if (p.has_parent_path())
            std::filesystem::create_directories(p.parent_path());
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_)
            throw std::runtime_error("cannot open trace file: " + path);
        out_ << "ref_time_ns,cs_id,event_kind,detail\n";
    }

    bool is_open() const { return out_.is_open(); }

    void row(RefNs ref_time_ns, const std::string& cs, const std::string& kind,
             const std::string& detail = {})
    {
        ++kind_counts_[kind];
        if (!out_.is_open())
            return;
        out_ << ref_time_ns << ',' << sanitize(cs) << ',' << sanitize(kind) << ','
             << sanitize(detail) << '\n';
    }

    void close()
    {
        if (out_.is_open())
            out_.close();
    }

    const std::map<std::string, std::int64_t>& kind_counts() const { return kind_counts_; }

    std::int64_t count(const std::string& kind) const
    {
        auto it = kind_counts_.find(kind);
        return it == kind_counts_.end() ? 0 : it->second;
    }

private:
    static std::string sanitize(std::string s)
    {
        for (char& c : s)
            if (c == ',' || c == '\n' || c == '\r')
                c = ' ';
        return s;
    }

    std::ofstream out_;
    std::map<std::string, std::int64_t> kind_counts_;
};

/// One parsed trace row (used by the reporter and by tests).
struct TraceRow {
    RefNs ref_time_ns = 0;
    std::string cs;
    std::string kind;
    std::string detail;

    /// Fetch a raw field from the detail list, e.g. str_field("verdict").
    std::string str_field(const std::string& key, const std::string& missing = "") const
    {
        std::string token = key + "=";
        std::size_t pos = 0;
        while (pos < detail.size()) {
            std::size_t end = detail.find(';', pos);
            if (end == std::string::npos)
                end = detail.size();
            if (detail.compare(pos, token.size(), token) == 0)
                return detail.substr(pos + token.size(), end - pos - token.size());
            pos = end + 1;
        }
        return missing;
    }

    /// Fetch an integer field from the detail list, e.g. field("pi_ns").
    std::int64_t field(const std::string& key, std::int64_t missing = 0) const
    {
        std::string raw = str_field(key);
        return raw.empty() ? missing : std::stoll(raw);
    }
};

inline std::vector<TraceRow> read_trace(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read trace file: " + path);
    std::vector<TraceRow> rows;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        TraceRow r;
        std::size_t a = line.find(',');
        std::size_t b = line.find(',', a + 1);
        std::size_t c = line.find(',', b + 1);
        r.ref_time_ns = std::stoll(line.substr(0, a));
        r.cs = line.substr(a + 1, b - a - 1);
        r.kind = line.substr(b + 1, c - b - 1);
        r.detail = line.substr(c + 1);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace sostime
