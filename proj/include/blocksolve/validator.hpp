#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blocksolve/config.hpp"
#include "blocksolve/problem.hpp"

namespace blocksolve {

/// Spectral-norm estimates from power iteration are lower bounds; bounds
/// built from them are inflated by this factor.
inline constexpr double kSpectralSafety = 1.01;

struct Violation {
    std::string condition;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string message;
};

struct ValidationReport {
    Regime regime = Regime::NoY;
    bool ok = true;
    std::vector<Violation> violations;
    std::vector<std::string> warnings;
    std::optional<SolverConfig> suggested;

    std::string to_text() const {
        std::string out = std::string("regime: ") + to_string(regime) + "\n";
        out += ok ? "status: ok\n" : "status: invalid\n";
        for (const auto& v : violations)
            out += "violation [" + v.condition + "] lhs = " + std::to_string(v.lhs) +
                   ", rhs = " + std::to_string(v.rhs) + ": " + v.message + "\n";
        for (const auto& w : warnings) out += "warning: " + w + "\n";
        if (suggested) out += "a valid configuration for these sample sizes is available via "
                              "parameter derivation\n";
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["regime"] = to_string(regime);
        j["ok"] = ok;
        j["violations"] = nlohmann::json::array();
        for (const auto& v : violations)
            j["violations"].push_back({{"condition", v.condition},
                                       {"lhs", v.lhs},
                                       {"rhs", v.rhs},
                                       {"message", v.message}});
        j["warnings"] = warnings;
        if (suggested) j["suggested"] = nlohmann::json::parse(config_to_json(*suggested));
        return j;
    }
};

namespace detail {

inline std::vector<double> block_spectral_bounds(const BlockLinearMap& map) {
    std::vector<double> out(static_cast<std::size_t>(map.blocks()));
    for (int i = 0; i < map.blocks(); ++i)
        out[static_cast<std::size_t>(i)] = kSpectralSafety * spectral_norm_sq(map, i);
    return out;
}

/// Smallest per-block proximal scalars satisfying the active regime's
/// sufficient conditions. theta = n/N.
struct EtaBounds {
    std::vector<double> eta_x;
    std::vector<double> eta_y;
};

inline EtaBounds eta_lower_bounds(const ConstrainedProblem& p, Regime regime, int n, int m,
                                  double rho_x, double rho_y, double rho) {
    const int num_n = p.num_x_blocks();
    const double theta = static_cast<double>(n) / static_cast<double>(num_n);
    const double lf = p.f.lipschitz();
    const double lg = p.g.lipschitz();
    EtaBounds b;
    switch (regime) {
        case Regime::NoY: {
            // P^k = eta_I I - rho_x A_I^T A_I >= L_f I, discharged per block
            // through ||A_I z||^2 <= n sum_i ||A_i z_i||^2.
            for (double a : block_spectral_bounds(p.x_map)) b.eta_x.push_back(lf + n * rho_x * a);
            break;
        }
        case Regime::SingleY: {
            const double lam_a = kSpectralSafety * spectral_norm_sq(p.x_map);
            const double lam_b = kSpectralSafety * spectral_norm_sq(p.y_map);
            const double coef_b = rho / (theta * theta * theta * theta) -
                                  rho / (theta * theta) + rho_y;
            b.eta_x.assign(static_cast<std::size_t>(num_n), lf + rho_x * lam_a);
            b.eta_y.assign(static_cast<std::size_t>(p.num_y_blocks()),
                           lg / theta + coef_b * lam_b);
            break;
        }
        case Regime::MultiXY: {
            const double coef_x = (2.0 - theta) * ((1.0 - theta) / (theta * theta) + 1.0);
            const double coef_y = (2.0 - theta) / (theta * theta);
            for (double a : block_spectral_bounds(p.x_map))
                b.eta_x.push_back(coef_x * n * rho_x * a + lf);
            for (double bb : block_spectral_bounds(p.y_map))
                b.eta_y.push_back(coef_y * m * rho_y * bb + lg);
            break;
        }
        case Regime::Stochastic: {
            const double lam_a = kSpectralSafety * spectral_norm_sq(p.x_map);
            b.eta_x.assign(static_cast<std::size_t>(num_n), lf + rho * lam_a);
            break;
        }
    }
    return b;
}

inline bool close_rel(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace detail

/// Derives the full parameter set for a regime from (n, m, rho_x): the
/// coupling rho/rho_y from the regime's ratio rule and each eta as the
/// smallest scalar passing the per-block sufficient condition.
inline SolverConfig derive_params(const ConstrainedProblem& p, Regime regime, int n, int m,
                                  double rho_x) {
    const int num_n = p.num_x_blocks();
    const int num_m = p.num_y_blocks();
    if (n < 1 || n > num_n)
        throw ParameterError("derive_params: randomization rule (U) requires 1 <= n <= N, got n = " +
                             std::to_string(n) + ", N = " + std::to_string(num_n));
    if (!(rho_x >= 0.0)) throw ParameterError("derive_params: rho_x must be nonnegative");
    const double theta = static_cast<double>(n) / static_cast<double>(num_n);

    SolverConfig cfg;
    cfg.regime = regime;
    cfg.n = n;
    cfg.rho_x = rho_x;

    switch (regime) {
        case Regime::NoY:
            if (num_m > 0)
                throw ParameterError("derive_params: the no-y regime applies to problems without "
                                     "y blocks; use single-y or multi-xy");
            cfg.m = 0;
            cfg.rho = theta * rho_x;
            cfg.rho_y = 0.0;
            break;
        case Regime::SingleY:
            if (num_m == 0)
                throw ParameterError("derive_params: single-y regime requires a y side");
            if (m != num_m)
                throw ParameterError("derive_params: single-y regime updates the whole y every "
                                     "iteration (m = M); got m = " + std::to_string(m));
            cfg.m = num_m;
            cfg.rho = theta * rho_x;
            cfg.rho_y = cfg.rho;
            break;
        case Regime::MultiXY:
            if (num_m == 0)
                throw ParameterError("derive_params: multi-xy regime requires a y side");
            if (m < 1 || m > num_m)
                throw ParameterError("derive_params: m must lie in [1, M]");
            if (static_cast<long>(n) * num_m != static_cast<long>(m) * num_n)
                throw ParameterError(
                    "derive_params: multi-xy regime requires matching sampling ratios n/N = m/M "
                    "(so that rho = n rho_x / N = m rho_y / M); got n/N = " + std::to_string(n) +
                    "/" + std::to_string(num_n) + ", m/M = " + std::to_string(m) + "/" +
                    std::to_string(num_m));
            cfg.m = m;
            cfg.rho = theta * rho_x;
            cfg.rho_y = cfg.rho * static_cast<double>(num_m) / static_cast<double>(m);
            break;
        case Regime::Stochastic:
            if (num_m > 0)
                throw ParameterError("derive_params: the stochastic engine requires a problem "
                                     "without y blocks");
            cfg.m = 0;
            cfg.rho = rho_x;
            cfg.rho_y = 0.0;
            break;
    }

    detail::EtaBounds bounds =
        detail::eta_lower_bounds(p, regime, cfg.n, cfg.m, cfg.rho_x, cfg.rho_y, cfg.rho);
    cfg.eta_x = std::move(bounds.eta_x);
    cfg.eta_y = std::move(bounds.eta_y);
    return cfg;
}

/// Checks the ratio rules and per-block scalar sufficient conditions for
/// the config's regime. Configs that pass are guaranteed to satisfy the
/// underlying matrix conditions (the scalar bounds are sufficient, not
/// necessary). rho = 0 is tolerated with a warning (frozen multiplier);
/// negative penalties are violations.
inline ValidationReport validate_config(const ConstrainedProblem& p, const SolverConfig& cfg) {
    ValidationReport rep;
    rep.regime = cfg.regime;
    auto fail = [&rep](const std::string& cond, double lhs, double rhs, const std::string& msg) {
        rep.ok = false;
        rep.violations.push_back({cond, lhs, rhs, msg});
    };

    const int num_n = p.num_x_blocks();
    const int num_m = p.num_y_blocks();
    const bool wants_y = cfg.regime == Regime::SingleY || cfg.regime == Regime::MultiXY;

    if (cfg.n < 1 || cfg.n > num_n)
        fail("sample-n", cfg.n, num_n, "randomization rule (U) requires 1 <= n <= N");
    if (wants_y && (cfg.m < 1 || cfg.m > num_m))
        fail("sample-m", cfg.m, num_m, "randomization rule (U) requires 1 <= m <= M");
    if ((cfg.regime == Regime::NoY || cfg.regime == Regime::Stochastic) && num_m > 0)
        fail("regime-shape", num_m, 0, "this regime applies to problems without y blocks");
    if (wants_y && num_m == 0)
        fail("regime-shape", num_m, 1, "this regime requires a y side");

    for (double v : {cfg.rho_x, cfg.rho_y, cfg.rho})
        if (v < 0.0) {
            fail("nonneg-penalty", v, 0.0, "penalty parameters must be nonnegative");
            break;
        }
    if (cfg.rho == 0.0) rep.warnings.push_back("rho = 0: the multiplier stays frozen");
    if (cfg.rho_x == 0.0)
        rep.warnings.push_back("rho_x = 0: the x update loses its augmented term");

    if (static_cast<int>(cfg.eta_x.size()) != num_n)
        fail("eta-x-length", static_cast<double>(cfg.eta_x.size()), num_n,
             "eta_x must carry one scalar per x block");
    if (wants_y && static_cast<int>(cfg.eta_y.size()) != num_m)
        fail("eta-y-length", static_cast<double>(cfg.eta_y.size()), num_m,
             "eta_y must carry one scalar per y block");
    if (!rep.ok) return rep;

    const double theta = cfg.theta_x(num_n);
    switch (cfg.regime) {
        case Regime::NoY:
            if (!detail::close_rel(cfg.rho, theta * cfg.rho_x))
                fail("rho-ratio", cfg.rho, theta * cfg.rho_x,
                     "the no-y regime requires rho = (n/N) rho_x");
            break;
        case Regime::SingleY:
            if (cfg.m != num_m)
                fail("m-equals-M", cfg.m, num_m, "the single-y regime updates all y blocks (m = M)");
            if (!detail::close_rel(cfg.rho, theta * cfg.rho_x) ||
                !detail::close_rel(cfg.rho_y, cfg.rho))
                fail("rho-ratio", cfg.rho, theta * cfg.rho_x,
                     "the single-y regime requires rho = rho_y = (n/N) rho_x");
            break;
        case Regime::MultiXY:
            if (static_cast<long>(cfg.n) * num_m != static_cast<long>(cfg.m) * num_n)
                fail("sample-ratio", static_cast<double>(cfg.n) / num_n,
                     static_cast<double>(cfg.m) / num_m,
                     "the multi-xy regime requires matching sampling ratios n/N = m/M");
            if (!detail::close_rel(cfg.rho, theta * cfg.rho_x))
                fail("rho-ratio-x", cfg.rho, theta * cfg.rho_x,
                     "the multi-xy regime requires rho = n rho_x / N");
            if (num_m > 0 &&
                !detail::close_rel(cfg.rho, cfg.rho_y * static_cast<double>(cfg.m) / num_m))
                fail("rho-ratio-y", cfg.rho, cfg.rho_y * static_cast<double>(cfg.m) / num_m,
                     "the multi-xy regime requires rho = m rho_y / M");
            break;
        case Regime::Stochastic:
            if (!detail::close_rel(cfg.rho, cfg.rho_x))
                fail("rho-equals-rho-x", cfg.rho, cfg.rho_x,
                     "the stochastic engine requires rho_x = rho");
            break;
    }

    if (rep.ok) {
        detail::EtaBounds bounds = detail::eta_lower_bounds(p, cfg.regime, cfg.n, cfg.m, cfg.rho_x,
                                                            cfg.rho_y, cfg.rho);
        for (std::size_t i = 0; i < bounds.eta_x.size(); ++i) {
            const double bound = bounds.eta_x[i];
            const double eta = cfg.eta_x[i];
            if (eta < bound * (1.0 - 1e-12))
                fail("eta-x[" + std::to_string(i) + "]", eta, bound,
                     "proximal scalar below the regime's sufficient bound");
        }
        for (std::size_t j = 0; j < bounds.eta_y.size(); ++j) {
            const double bound = bounds.eta_y[j];
            const double eta = cfg.eta_y[j];
            if (eta < bound * (1.0 - 1e-12))
                fail("eta-y[" + std::to_string(j) + "]", eta, bound,
                     "proximal scalar below the regime's sufficient bound");
        }
    }

    if (!rep.ok && cfg.rho_x > 0.0) {
        try {
            SolverConfig s = derive_params(p, cfg.regime, cfg.n,
                                           cfg.regime == Regime::SingleY ? num_m : cfg.m,
                                           cfg.rho_x);
            s.max_iters = cfg.max_iters;
            s.seed = cfg.seed;
            rep.suggested = std::move(s);
        } catch (const Error&) {
            // sample sizes themselves are inconsistent; nothing to suggest
        }
    }
    return rep;
}

} // namespace blocksolve
