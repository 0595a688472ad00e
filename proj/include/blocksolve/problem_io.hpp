#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blocksolve/problem.hpp"

namespace blocksolve {

namespace detail {

/// Decimal with 17 significant digits: enough for bit-exact double
/// round-trips through the text file.
inline std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void append_real_array(std::string& out, const double* data, long n) {
    out += '[';
    for (long i = 0; i < n; ++i) {
        if (i) out += ',';
        out += fmt_real(data[i]);
    }
    out += ']';
}

inline void append_int_array(std::string& out, const std::vector<int>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[static_cast<std::size_t>(i)]);
    }
    out += ']';
}

/// Row-major flattening of one map block.
inline void append_matrix(std::string& out, const MatrixXd& m) {
    out += '[';
    for (long r = 0; r < m.rows(); ++r)
        for (long c = 0; c < m.cols(); ++c) {
            if (r || c) out += ',';
            out += fmt_real(m(r, c));
        }
    out += ']';
}

inline void append_map_blocks(std::string& out, const BlockLinearMap& map) {
    out += '[';
    for (int i = 0; i < map.blocks(); ++i) {
        if (i) out += ',';
        append_matrix(out, map.block(i));
    }
    out += ']';
}

inline void append_smooth(std::string& out, const SmoothOracle& s, const char* which) {
    if (s.kind() == SmoothKind::Custom)
        throw IoError(std::string(which) + ": custom oracles not serializable");
    out += "{\"kind\":\"";
    out += to_string(s.kind());
    out += '"';
    if (s.kind() == SmoothKind::Quadratic) {
        out += ",\"Q\":";
        append_matrix(out, s.q());
        out += ",\"c\":";
        append_real_array(out, s.c().data(), s.c().size());
        out += ",\"c0\":";
        out += fmt_real(s.c0());
    }
    out += ",\"lipschitz\":";
    out += fmt_real(s.lipschitz());
    out += '}';
}

inline void append_prox_list(std::string& out, const std::vector<ProxOracle>& list,
                             const char* which) {
    out += '[';
    for (std::size_t i = 0; i < list.size(); ++i) {
        const ProxOracle& p = list[i];
        if (p.kind() == ProxKind::Custom)
            throw IoError(std::string(which) + "[" + std::to_string(i) +
                          "]: custom oracles not serializable");
        if (i) out += ',';
        out += "{\"kind\":\"";
        out += to_string(p.kind());
        out += "\",\"params\":{";
        switch (p.kind()) {
            case ProxKind::L1:
            case ProxKind::L1Nonneg:
                out += "\"tau\":";
                out += fmt_real(p.tau());
                break;
            case ProxKind::Box:
                out += "\"lo\":";
                out += fmt_real(p.lo());
                out += ",\"hi\":";
                out += fmt_real(p.hi());
                break;
            default:
                break;
        }
        out += "}}";
    }
    out += ']';
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                           const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw IoError("problem file: missing field '" + std::string(key) + "' in " + ctx);
    return *it;
}

inline std::vector<int> parse_int_array(const nlohmann::json& j, const std::string& ctx) {
    if (!j.is_array()) throw IoError("problem file: " + ctx + " must be an array");
    std::vector<int> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(e.get<int>());
    return out;
}

inline VectorXd parse_real_array(const nlohmann::json& j, const std::string& ctx) {
    if (!j.is_array()) throw IoError("problem file: " + ctx + " must be an array");
    VectorXd out(j.size());
    long i = 0;
    for (const auto& e : j) out(i++) = e.get<double>();
    return out;
}

inline MatrixXd parse_matrix(const nlohmann::json& j, long rows, long cols,
                             const std::string& ctx) {
    const VectorXd flat = parse_real_array(j, ctx);
    if (flat.size() != rows * cols)
        throw IoError("problem file: " + ctx + " has " + std::to_string(flat.size()) +
                      " entries, expected " + std::to_string(rows) + "x" + std::to_string(cols));
    MatrixXd m(rows, cols);
    long idx = 0;
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) m(r, c) = flat(idx++);
    return m;
}

inline BlockLinearMap parse_map(const nlohmann::json& j, const std::vector<int>& dims, int rows,
                                const std::string& ctx) {
    if (!j.is_array()) throw IoError("problem file: " + ctx + " must be an array of blocks");
    if (j.size() != dims.size())
        throw IoError("problem file: " + ctx + " has " + std::to_string(j.size()) +
                      " blocks, partition has " + std::to_string(dims.size()));
    std::vector<MatrixXd> blocks;
    blocks.reserve(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i)
        blocks.push_back(parse_matrix(j[i], rows, dims[i],
                                      ctx + "[" + std::to_string(i) + "]"));
    return BlockLinearMap(BlockPartition(dims), rows, std::move(blocks));
}

inline SmoothOracle parse_smooth(const nlohmann::json& j, long dim, const std::string& ctx) {
    const std::string kind = require_field(j, "kind", ctx).get<std::string>();
    const double lip = require_field(j, "lipschitz", ctx).get<double>();
    if (kind == "zero") return SmoothOracle::zero();
    if (kind == "quadratic") {
        MatrixXd q = parse_matrix(require_field(j, "Q", ctx), dim, dim, ctx + ".Q");
        VectorXd c = parse_real_array(require_field(j, "c", ctx), ctx + ".c");
        const double c0 = j.contains("c0") ? j["c0"].get<double>() : 0.0;
        return SmoothOracle::quadratic(std::move(q), std::move(c), lip, c0);
    }
    if (kind == "custom") throw IoError(ctx + ": custom oracles not serializable");
    throw IoError("problem file: unknown smooth kind '" + kind + "' in " + ctx);
}

inline ProxOracle parse_prox(const nlohmann::json& j, const std::string& ctx) {
    const std::string kind = require_field(j, "kind", ctx).get<std::string>();
    const nlohmann::json& params = require_field(j, "params", ctx);
    if (kind == "zero") return ProxOracle::zero();
    if (kind == "nonneg") return ProxOracle::nonneg();
    if (kind == "l1")
        return ProxOracle::l1(require_field(params, "tau", ctx + ".params").get<double>());
    if (kind == "l1nonneg")
        return ProxOracle::l1_nonneg(require_field(params, "tau", ctx + ".params").get<double>());
    if (kind == "box")
        return ProxOracle::box(require_field(params, "lo", ctx + ".params").get<double>(),
                               require_field(params, "hi", ctx + ".params").get<double>());
    if (kind == "custom") throw IoError(ctx + ": custom oracles not serializable");
    throw IoError("problem file: unknown prox kind '" + kind + "' in " + ctx);
}

} // namespace detail

/// Serializes a problem to the JSON document described in the README.
/// Custom oracles are rejected.
inline std::string problem_to_json(const ConstrainedProblem& p) {
    using namespace detail;
    p.validate();
    std::string out;
    out.reserve(1 << 16);
    out += "{\n\"version\":1,\n\"p\":" + std::to_string(p.rows()) + ",\n";
    out += "\"xPartition\":";
    append_int_array(out, p.x_map.partition().dims());
    out += ",\n\"yPartition\":";
    append_int_array(out, p.y_map.partition().dims());
    out += ",\n\"A\":";
    append_map_blocks(out, p.x_map);
    out += ",\n\"B\":";
    append_map_blocks(out, p.y_map);
    out += ",\n\"b\":";
    append_real_array(out, p.b.data(), p.b.size());
    out += ",\n\"fOracle\":";
    append_smooth(out, p.f, "fOracle");
    out += ",\n\"gOracle\":";
    append_smooth(out, p.g, "gOracle");
    out += ",\n\"xProx\":";
    append_prox_list(out, p.x_prox, "xProx");
    out += ",\n\"yProx\":";
    append_prox_list(out, p.y_prox, "yProx");
    if (p.x_feasible) {
        out += ",\n\"xFeasible\":";
        append_real_array(out, p.x_feasible->data(), p.x_feasible->size());
    }
    out += "\n}\n";
    return out;
}

inline ConstrainedProblem problem_from_json(const std::string& text) {
    using namespace detail;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("problem file parse error: ") + e.what());
    }
    try {
        const int version = require_field(j, "version", "root").get<int>();
        if (version != 1)
            throw IoError("problem file: unsupported version " + std::to_string(version));
        const int rows = require_field(j, "p", "root").get<int>();
        const auto x_dims = parse_int_array(require_field(j, "xPartition", "root"), "xPartition");
        const auto y_dims = parse_int_array(require_field(j, "yPartition", "root"), "yPartition");

        ConstrainedProblem p;
        p.x_map = parse_map(require_field(j, "A", "root"), x_dims, rows, "A");
        p.y_map = y_dims.empty() ? BlockLinearMap::empty(rows)
                                 : parse_map(require_field(j, "B", "root"), y_dims, rows, "B");
        p.b = parse_real_array(require_field(j, "b", "root"), "b");
        p.f = parse_smooth(require_field(j, "fOracle", "root"),
                           p.x_map.partition().total_dim(), "fOracle");
        p.g = parse_smooth(require_field(j, "gOracle", "root"),
                           p.y_map.partition().total_dim(), "gOracle");
        const nlohmann::json& xp = require_field(j, "xProx", "root");
        for (std::size_t i = 0; i < xp.size(); ++i)
            p.x_prox.push_back(parse_prox(xp[i], "xProx[" + std::to_string(i) + "]"));
        const nlohmann::json& yp = require_field(j, "yProx", "root");
        for (std::size_t i = 0; i < yp.size(); ++i)
            p.y_prox.push_back(parse_prox(yp[i], "yProx[" + std::to_string(i) + "]"));
        if (j.contains("xFeasible"))
            p.x_feasible = parse_real_array(j["xFeasible"], "xFeasible");
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("problem file: malformed value: ") + e.what());
    }
}

inline void save_problem(const ConstrainedProblem& p, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << problem_to_json(p);
    if (!f) throw IoError("write to '" + path + "' failed");
}

inline ConstrainedProblem load_problem(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return problem_from_json(ss.str());
}

} // namespace blocksolve
