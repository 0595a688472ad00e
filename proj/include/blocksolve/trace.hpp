#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "blocksolve/errors.hpp"

namespace blocksolve {

/// One metrics row. obj_* columns carry raw objective values; consumers
/// subtract a reference optimum to plot gaps. epoch = k * (n/N) for the
/// randomized engines.
struct TraceRow {
    long k = 0;
    double epoch = 0.0;
    double obj_last = 0.0;
    double obj_erg = 0.0;
    double feas_last = 0.0;
    double feas_erg = 0.0;
    double wall_s = 0.0;
};

struct Trace {
    std::vector<TraceRow> rows;

    bool empty() const { return rows.empty(); }
    std::size_t size() const { return rows.size(); }
};

inline constexpr const char* kTraceCsvHeader = "k,epoch,obj_last,obj_erg,feas_last,feas_erg,wall_s";

namespace detail {
inline std::string csv_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace detail

/// CSV with 17-significant-digit reals. zero_wall replaces the wall_s
/// column with zeros so identical (argv, seed) runs produce bitwise
/// identical files; the CLI uses it for solve traces.
inline void write_trace_csv(const Trace& trace, const std::string& path, bool zero_wall = false) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << kTraceCsvHeader << "\n";
    for (const auto& r : trace.rows) {
        f << r.k << ',' << detail::csv_real(r.epoch) << ',' << detail::csv_real(r.obj_last) << ','
          << detail::csv_real(r.obj_erg) << ',' << detail::csv_real(r.feas_last) << ','
          << detail::csv_real(r.feas_erg) << ',' << detail::csv_real(zero_wall ? 0.0 : r.wall_s)
          << '\n';
    }
    if (!f) throw IoError("write to '" + path + "' failed");
}

/// Reads back a trace CSV (used by tests and the bench summary).
inline Trace read_trace_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(f, line)) throw IoError("trace file '" + path + "' is empty");
    if (line != kTraceCsvHeader)
        throw IoError("trace file '" + path + "' has unexpected header: " + line);
    Trace t;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        TraceRow r;
        std::istringstream ss(line);
        char comma = 0;
        ss >> r.k >> comma >> r.epoch >> comma >> r.obj_last >> comma >> r.obj_erg >> comma >>
            r.feas_last >> comma >> r.feas_erg >> comma >> r.wall_s;
        if (ss.fail()) throw IoError("trace file '" + path + "': malformed row: " + line);
        t.rows.push_back(r);
    }
    return t;
}

} // namespace blocksolve
