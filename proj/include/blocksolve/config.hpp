#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blocksolve/errors.hpp"

namespace blocksolve {

/// Parameter regimes, one per convergence theorem:
///   NoY      - multiple x blocks, no y variable;   rho = theta * rho_x
///   SingleY  - y updated as one block (m = M);     rho = rho_y = theta * rho_x
///   MultiXY  - both sides multi-block, n/N = m/M;  rho = n rho_x/N = m rho_y/M
///   Stochastic - the stochastic-gradient engine;   rho_x = rho, no y side
enum class Regime { NoY, SingleY, MultiXY, Stochastic };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::NoY: return "no-y";
        case Regime::SingleY: return "single-y";
        case Regime::MultiXY: return "multi-xy";
        case Regime::Stochastic: return "stochastic";
    }
    return "?";
}

inline Regime regime_from_string(const std::string& s) {
    if (s == "no-y") return Regime::NoY;
    if (s == "single-y") return Regime::SingleY;
    if (s == "multi-xy") return Regime::MultiXY;
    if (s == "stochastic") return Regime::Stochastic;
    throw ParameterError("unknown regime '" + s + "' (expected no-y | single-y | multi-xy | stochastic)");
}

/// Penalty/step parameters of the block update loop. eta_x[i] is the
/// scalar eta_i of the proximal weight P_hat_i = eta_i I (and eta_y[j]
/// likewise for Q_hat_j); with the weight choice P^k = P_hat_I - rho_x
/// A_I^T A_I the selected blocks decouple into closed-form prox steps.
struct SolverConfig {
    Regime regime = Regime::NoY;
    int n = 1; // x-subset size per iteration
    int m = 1; // y-subset size per iteration (ignored for NoY/Stochastic)
    double rho_x = 1.0;
    double rho_y = 1.0;
    double rho = 1.0;
    std::vector<double> eta_x;
    std::vector<double> eta_y;
    long max_iters = 1000;
    std::uint64_t seed = 0;

    double theta_x(int total_blocks) const {
        return static_cast<double>(n) / static_cast<double>(total_blocks);
    }
};

inline std::string config_to_json(const SolverConfig& c) {
    nlohmann::json j;
    j["regime"] = to_string(c.regime);
    j["n"] = c.n;
    j["m"] = c.m;
    j["rhoX"] = c.rho_x;
    j["rhoY"] = c.rho_y;
    j["rho"] = c.rho;
    j["etaX"] = c.eta_x;
    j["etaY"] = c.eta_y;
    j["maxIters"] = c.max_iters;
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

inline SolverConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("config file parse error: ") + e.what());
    }
    try {
        SolverConfig c;
        c.regime = regime_from_string(j.at("regime").get<std::string>());
        c.n = j.at("n").get<int>();
        c.m = j.at("m").get<int>();
        c.rho_x = j.at("rhoX").get<double>();
        c.rho_y = j.at("rhoY").get<double>();
        c.rho = j.at("rho").get<double>();
        c.eta_x = j.at("etaX").get<std::vector<double>>();
        c.eta_y = j.at("etaY").get<std::vector<double>>();
        if (j.contains("maxIters")) c.max_iters = j["maxIters"].get<long>();
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("config file: missing or malformed field: ") + e.what());
    }
}

inline SolverConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return config_from_json(ss.str());
}

inline void save_config(const SolverConfig& c, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << config_to_json(c);
}

} // namespace blocksolve
