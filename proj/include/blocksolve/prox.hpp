#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include "blocksolve/block.hpp"

namespace blocksolve {

enum class ProxKind { Zero, L1, Nonneg, Box, L1Nonneg, Custom };

inline const char* to_string(ProxKind k) {
    switch (k) {
        case ProxKind::Zero: return "zero";
        case ProxKind::L1: return "l1";
        case ProxKind::Nonneg: return "nonneg";
        case ProxKind::Box: return "box";
        case ProxKind::L1Nonneg: return "l1nonneg";
        case ProxKind::Custom: return "custom";
    }
    return "?";
}

/// One block's nonsmooth term u_i fused with its constraint set X_i.
/// prox(v, eta) returns the exact minimizer of
///     u(z) + indicator_X(z) + (eta/2) ||z - v||^2
/// in closed form for the catalog kinds. At soft-threshold kinks the
/// returned point is 0 (fixed tie-break).
class ProxOracle {
public:
    using ProxFn = std::function<VectorXd(const VectorXd&, double)>;
    using ValueFn = std::function<double(const VectorXd&)>;

    ProxOracle() : kind_(ProxKind::Zero) {}

    static ProxOracle zero() { return ProxOracle(); }

    static ProxOracle l1(double tau) {
        check_tau(tau);
        ProxOracle p;
        p.kind_ = ProxKind::L1;
        p.tau_ = tau;
        return p;
    }

    static ProxOracle nonneg() {
        ProxOracle p;
        p.kind_ = ProxKind::Nonneg;
        return p;
    }

    /// Coordinate-wise box [lo, hi].
    static ProxOracle box(double lo, double hi) {
        if (!(lo <= hi)) throw ParameterError("box prox requires lo <= hi");
        ProxOracle p;
        p.kind_ = ProxKind::Box;
        p.lo_ = lo;
        p.hi_ = hi;
        return p;
    }

    static ProxOracle l1_nonneg(double tau) {
        check_tau(tau);
        ProxOracle p;
        p.kind_ = ProxKind::L1Nonneg;
        p.tau_ = tau;
        return p;
    }

    static ProxOracle custom(ProxFn prox_fn, ValueFn value_fn) {
        ProxOracle p;
        p.kind_ = ProxKind::Custom;
        p.prox_fn_ = std::move(prox_fn);
        p.value_fn_ = std::move(value_fn);
        return p;
    }

    ProxKind kind() const { return kind_; }
    double tau() const { return tau_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    VectorXd prox(const VectorXd& v, double eta) const {
        if (!(eta > 0.0)) throw ParameterError("prox requires eta > 0, got " + std::to_string(eta));
        switch (kind_) {
            case ProxKind::Zero:
                return v;
            case ProxKind::L1:
                return soft_threshold(v, tau_ / eta);
            case ProxKind::Nonneg:
                return v.cwiseMax(0.0);
            case ProxKind::Box:
                return v.cwiseMax(lo_).cwiseMin(hi_);
            case ProxKind::L1Nonneg:
                return (v.array() - tau_ / eta).max(0.0).matrix();
            case ProxKind::Custom:
                return prox_fn_(v, eta);
        }
        throw ParameterError("unreachable prox kind");
    }

    /// u(z) + indicator_X(z); +inf when z lies outside X beyond `tol`
    /// (absolute, default 1e-9).
    double value(const VectorXd& z, double tol = 1e-9) const {
        constexpr double inf = std::numeric_limits<double>::infinity();
        switch (kind_) {
            case ProxKind::Zero:
                return 0.0;
            case ProxKind::L1:
                return tau_ * z.lpNorm<1>();
            case ProxKind::Nonneg:
                return z.minCoeff() >= -tol ? 0.0 : inf;
            case ProxKind::Box:
                return (z.minCoeff() >= lo_ - tol && z.maxCoeff() <= hi_ + tol) ? 0.0 : inf;
            case ProxKind::L1Nonneg:
                return z.minCoeff() >= -tol ? tau_ * z.lpNorm<1>() : inf;
            case ProxKind::Custom:
                return value_fn_(z);
        }
        throw ParameterError("unreachable prox kind");
    }

    bool is_member(const VectorXd& z, double tol = 1e-9) const {
        return std::isfinite(value(z, tol));
    }

    /// True when u = 0 and the oracle is only a set indicator, so prox is
    /// a projection (idempotent).
    bool indicator_only() const {
        return kind_ == ProxKind::Zero || kind_ == ProxKind::Nonneg || kind_ == ProxKind::Box ||
               (kind_ == ProxKind::L1Nonneg && tau_ == 0.0) ||
               (kind_ == ProxKind::L1 && tau_ == 0.0);
    }

private:
    static void check_tau(double tau) {
        if (!(tau >= 0.0)) throw ParameterError("l1 weight must be nonnegative");
    }
    static VectorXd soft_threshold(const VectorXd& v, double t) {
        return v.array().sign() * (v.array().abs() - t).max(0.0);
    }

    ProxKind kind_;
    double tau_ = 0.0;
    double lo_ = 0.0;
    double hi_ = 0.0;
    ProxFn prox_fn_;
    ValueFn value_fn_;
};

} // namespace blocksolve
