#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jumplev/common.hpp"
#include "jumplev/dle.hpp"
#include "jumplev/jumploc.hpp"
#include "jumplev/simkit.hpp"
#include "jumplev/tick_series.hpp"

namespace jumplev {

struct IngestOptions {
    long min_ticks = 100;
    bool drop_zero_returns = false;
};

struct IngestReport {
    bool rescaled = false;
    double time_origin = 0.0;
    double time_span = 1.0;
    long duplicates_collapsed = 0;
    long zero_returns_dropped = 0;
    long rows = 0;
};

namespace detail {

inline bool parse_double_strict(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    return std::isfinite(out);
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

// CSV with header "time,logprice"; raw clock times are rescaled to [0,1] with
// the affine map recorded. Duplicate timestamps collapse last-wins.
inline TickSeries ingest_ticks(const std::string& path, const IngestOptions& opt = {},
                               IngestReport* report = nullptr) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open tick file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw io_error("empty tick file: " + path);

    std::vector<double> times, prices;
    long rownum = 1;
    IngestReport rep;
    while (std::getline(in, line)) {
        ++rownum;
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw io_error(path + ": row " + std::to_string(rownum) + " is not time,logprice");
        double t, p;
        if (!detail::parse_double_strict(line.substr(0, comma), t) ||
            !detail::parse_double_strict(line.substr(comma + 1), p))
            throw io_error(path + ": non-numeric field at row " + std::to_string(rownum));
        if (!times.empty() && t < times.back())
            throw io_error(path + ": unsorted time at row " + std::to_string(rownum));
        if (!times.empty() && t == times.back()) {
            prices.back() = p;  // duplicate timestamp: last wins
            ++rep.duplicates_collapsed;
            continue;
        }
        if (opt.drop_zero_returns && !prices.empty() && p == prices.back()) {
            ++rep.zero_returns_dropped;
            continue;
        }
        times.push_back(t);
        prices.push_back(p);
    }
    rep.rows = static_cast<long>(times.size());
    if (rep.rows < opt.min_ticks)
        throw io_error(path + ": fewer than " + std::to_string(opt.min_ticks) + " usable ticks");

    TickSeries ts;
    if (times.back() > 1.0 + 1e-9 || times.front() < 0.0) {
        rep.rescaled = true;
        rep.time_origin = times.front();
        rep.time_span = times.back() - times.front();
        if (rep.time_span <= 0) throw io_error(path + ": degenerate time span");
        for (double& t : times) t = (t - rep.time_origin) / rep.time_span;
    }
    ts.times = std::move(times);
    ts.y = std::move(prices);
    ts.time_origin = rep.time_origin;
    ts.time_span = rep.rescaled ? rep.time_span : 1.0;
    ts.validate();
    if (report) *report = rep;
    return ts;
}

inline void write_sim_path(const std::string& path, const SimPath& p) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write: " + path);
    out << "time,x,sig2,y\n";
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        out << detail::format_double(p.times[i]) << ',' << detail::format_double(p.x[i]) << ','
            << detail::format_double(p.sig2[i]) << ','
            << detail::format_double(i < p.y.size() ? p.y[i] : p.x[i]) << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

inline void write_events(const std::string& path, const std::vector<JumpEvent>& events,
                         const std::string& day = "0") {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write: " + path);
    out << "day,bin,tau_hat,dx_hat,sig2_left,sig2_right,qv_inc,pvalue_price,pvalue_vol\n";
    for (const JumpEvent& e : events) {
        out << day << ',' << e.k << ',' << detail::format_double(e.tau_hat) << ','
            << detail::format_double(e.dx_hat) << ',' << detail::format_double(e.sig2_left) << ','
            << detail::format_double(e.sig2_right) << ',' << detail::format_double(e.qv_inc) << ','
            << detail::format_double(e.price_pvalue) << ','
            << detail::format_double(e.vol_jump_pvalue) << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

inline void write_dle(const std::string& path, const std::vector<std::pair<std::string, DleResult>>& rows) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write: " + path);
    out << "day,mode,n_jumps,dle,dle_x1e7,selfscale_var,stat,pvalue,corr,xx_d,ss_d\n";
    for (const auto& [tag, r] : rows) {
        const std::size_t sep = tag.find('/');
        const std::string day = sep == std::string::npos ? tag : tag.substr(0, sep);
        const std::string mode = sep == std::string::npos ? "all" : tag.substr(sep + 1);
        const TestResult t = dle_test(r);
        out << day << ',' << mode << ',' << r.n_jumps << ',' << detail::format_double(r.dle) << ','
            << detail::format_double(r.dle * 1e7) << ',' << detail::format_double(r.selfscale_var)
            << ',' << detail::format_double(t.stat) << ',' << detail::format_double(t.pvalue) << ','
            << detail::format_double(r.corr) << ',' << detail::format_double(r.xx_d) << ','
            << detail::format_double(r.ss_d) << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

// Every emitted CSV gets a sidecar recording the config hash, root seed and
// tool version so runs can be reproduced byte for byte.
inline void write_sidecar(const std::string& csv_path, const std::string& config_text,
                          std::uint64_t seed) {
    std::ofstream out(csv_path + ".meta.json");
    if (!out) throw io_error("cannot write sidecar for: " + csv_path);
    out << "{\n"
        << "  \"tool\": \"jumplev\",\n"
        << "  \"version\": \"" << kVersion << "\",\n"
        << "  \"seed\": " << seed << ",\n"
        << "  \"config_hash\": \"" << std::hex << detail::fnv1a(config_text) << std::dec << "\",\n"
        << "  \"config\": \"" << config_text << "\"\n"
        << "}\n";
}

}  // namespace jumplev
