#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "blocksolve/config.hpp"
#include "blocksolve/parallel.hpp"
#include "blocksolve/problem.hpp"
#include "blocksolve/sampler.hpp"
#include "blocksolve/state.hpp"

namespace blocksolve {

/// Cadence of the maintained-residual consistency check.
inline constexpr long kResidualCheckEvery = 100;
inline constexpr double kResidualCheckTol = 1e-9;

/// Verifies the incrementally maintained residual against a full
/// recompute and then refreshes it, so rounding drift never accumulates
/// across more than kResidualCheckEvery iterations.
inline void check_and_refresh_residual(IterateState& s, const ConstrainedProblem& p) {
    VectorXd fresh = apply(p.x_map, s.x) + apply(p.y_map, s.y) - p.b;
    const double dev = (s.r - fresh).norm();
    ++s.residual_checks;
    if (dev > kResidualCheckTol)
        throw SolverError("residual consistency check failed at k = " + std::to_string(s.k) +
                          ": ||r_stored - recomputed|| = " + std::to_string(dev));
    s.r = std::move(fresh);
}

/// Folds the pre-step iterate into the ergodic sums (x^0 excluded) and
/// stashes y^k, lambda^k for the single-y ergodic subproblem. Every
/// stepper calls this exactly once per iteration, before mutating state.
inline void begin_iteration(IterateState& s) {
    if (s.k >= 1) {
        s.erg_x += s.x.data();
        if (s.y.size() > 0) s.erg_y += s.y.data();
    }
    s.prev_y = s.y;
    s.prev_lambda = s.lambda;
}

namespace detail {

inline void check_engine_config(const IterateState& s, const ConstrainedProblem& p,
                                const SolverConfig& cfg) {
    if (static_cast<int>(cfg.eta_x.size()) != p.num_x_blocks())
        throw ParameterError("config eta_x has " + std::to_string(cfg.eta_x.size()) +
                             " entries for " + std::to_string(p.num_x_blocks()) + " x blocks");
    if (p.has_y() && cfg.regime != Regime::NoY &&
        static_cast<int>(cfg.eta_y.size()) != p.num_y_blocks())
        throw ParameterError("config eta_y has " + std::to_string(cfg.eta_y.size()) +
                             " entries for " + std::to_string(p.num_y_blocks()) + " y blocks");
    if (s.x.partition() != p.x_map.partition() || s.y.partition() != p.y_map.partition())
        throw DimensionError("state partitions do not match the problem");
}

} // namespace detail

/// Prox-linear update of x block i from the frozen iteration-start state:
///   prox_{u_i, eta_i}( x_i^k - d_i / eta_i ),
///   d_i = grad_i f(x^k) - A_i^T lambda^k + rho_x A_i^T r^k.
/// The proximal weight choice cancels the quadratic coupling across the
/// selected blocks, so each reduces to this closed form.
inline VectorXd x_block_update(const IterateState& s, const ConstrainedProblem& p,
                               const SolverConfig& cfg, int i) {
    const double eta = cfg.eta_x[static_cast<std::size_t>(i)];
    VectorXd d = p.f.grad_block(s.x, i);
    d.noalias() += p.x_map.block(i).transpose() * (cfg.rho_x * s.r - s.lambda);
    return p.x_prox[static_cast<std::size_t>(i)].prox(s.x.block(i) - d / eta, eta);
}

/// Same update on the y side; state.r must hold the half-step residual
/// r^{k+1/2} (as it does between the x and y phases of a step):
///   prox_{v_j, eta'_j}( y_j^k - e_j / eta'_j ),
///   e_j = grad_j g(y^k) - B_j^T lambda^k + rho_y B_j^T r^{k+1/2}.
inline VectorXd y_block_update(const IterateState& s, const ConstrainedProblem& p,
                               const SolverConfig& cfg, int j) {
    const double eta = cfg.eta_y[static_cast<std::size_t>(j)];
    VectorXd e = p.g.grad_block(s.y, j);
    e.noalias() += p.y_map.block(j).transpose() * (cfg.rho_y * s.r - s.lambda);
    return p.y_prox[static_cast<std::size_t>(j)].prox(s.y.block(j) - e / eta, eta);
}

/// One full iteration over explicitly given (sorted) block subsets:
/// x updates in parallel from the frozen state, residual half-update in
/// ascending block order, y updates, residual completion, multiplier
/// step lambda -= rho r. Unselected blocks are untouched.
inline void step_with_subsets(IterateState& s, const ConstrainedProblem& p,
                              const SolverConfig& cfg, const std::vector<int>& x_sel,
                              const std::vector<int>& y_sel, int workers = 1) {
    detail::check_engine_config(s, p, cfg);
    begin_iteration(s);

    const int nx = static_cast<int>(x_sel.size());
    std::vector<VectorXd> new_x(static_cast<std::size_t>(nx));
    parallel_for(nx, workers, [&](int pos) {
        new_x[static_cast<std::size_t>(pos)] =
            x_block_update(s, p, cfg, x_sel[static_cast<std::size_t>(pos)]);
    });
    for (int pos = 0; pos < nx; ++pos) {
        const int i = x_sel[static_cast<std::size_t>(pos)];
        const VectorXd& xi = new_x[static_cast<std::size_t>(pos)];
        s.r.noalias() += p.x_map.block(i) * (xi - s.x.block(i));
        s.x.block(i) = xi;
    }

    const int ny = static_cast<int>(y_sel.size());
    std::vector<VectorXd> new_y(static_cast<std::size_t>(ny));
    parallel_for(ny, workers, [&](int pos) {
        new_y[static_cast<std::size_t>(pos)] =
            y_block_update(s, p, cfg, y_sel[static_cast<std::size_t>(pos)]);
    });
    for (int pos = 0; pos < ny; ++pos) {
        const int j = y_sel[static_cast<std::size_t>(pos)];
        const VectorXd& yj = new_y[static_cast<std::size_t>(pos)];
        s.r.noalias() += p.y_map.block(j) * (yj - s.y.block(j));
        s.y.block(j) = yj;
    }

    s.lambda.noalias() -= cfg.rho * s.r;
    ++s.k;
    if (s.k % kResidualCheckEvery == 0) check_and_refresh_residual(s, p);
}

/// One randomized iteration: draws I_k (and J_k when the problem has a
/// y side) from the sampling stream, x draw first, then performs the
/// block updates. With n = N and m = M the subsets are forced and the
/// method is deterministic.
inline void step(IterateState& s, const ConstrainedProblem& p, const SolverConfig& cfg, Rng& rng,
                 int workers = 1) {
    SubsetSample xs = sample_subset(rng, p.num_x_blocks(), cfg.n);
    std::vector<int> ys;
    if (p.has_y() && cfg.regime != Regime::NoY)
        ys = sample_subset(rng, p.num_y_blocks(), cfg.m).indices;
    step_with_subsets(s, p, cfg, xs.indices, ys, workers);
}

/// Ergodic average
///   x_hat^t = (x^{t+1} + theta sum_{k=1..t} x^k) / (1 + theta t)
/// at t = state.k - 1; y_hat is filled with the same formula in the
/// multi-xy regime (the single-y regime builds its y average through
/// compute_tilde_y instead).
inline ErgodicPoint ergodic_point(const IterateState& s, const SolverConfig& cfg) {
    if (s.k < 1) throw SolverError("ergodic_point: called before the first step");
    const long t = s.k - 1;
    const double theta = cfg.theta_x(s.x.blocks());
    const double denom = 1.0 + theta * static_cast<double>(t);
    ErgodicPoint e;
    e.t = t;
    e.x_hat = BlockVector(s.x.partition(), (s.x.data() + theta * s.erg_x) / denom);
    if (cfg.regime == Regime::MultiXY && s.y.size() > 0)
        e.y_hat = BlockVector(s.y.partition(), (s.y.data() + theta * s.erg_y) / denom);
    else
        e.y_hat = s.y; // frozen / last y; single-y callers override via tilde-y
    return e;
}

/// Solves the single-y ergodic subproblem at t = state.k - 1:
///   tilde_y^{t+1} = argmin_y <grad g(y^t) - B^T lambda^t, y> + v(y)
///                   + (rho_x/2) ||A x^{t+1} + B y - b||^2
///                   + (theta/2) ||y - y^t||^2_{Qhat - rho_y B^T B}
/// by proximal gradient descent with step 1/(L_g + rho_x ||B||^2 +
/// theta max eta'), to fixed-point (KKT) residual 1e-10.
inline BlockVector compute_tilde_y(const IterateState& s, const ConstrainedProblem& p,
                                   const SolverConfig& cfg) {
    if (cfg.regime != Regime::SingleY)
        throw ParameterError("compute_tilde_y applies to the single-y regime only");
    if (!p.has_y()) throw ParameterError("compute_tilde_y: problem has no y side");
    if (s.k < 1) throw SolverError("compute_tilde_y: called before the first step");

    constexpr long kMaxInner = 100000;
    constexpr double kKktTol = 1e-10;

    const BlockPartition& part = p.y_map.partition();
    const double theta = cfg.theta_x(p.num_x_blocks());
    const VectorXd y_t = s.prev_y.data();

    VectorXd lin = p.g.grad(y_t);
    for (int j = 0; j < part.count(); ++j)
        lin.segment(part.offset(j), part.dim(j)).noalias() -=
            p.y_map.block(j).transpose() * s.prev_lambda;

    const VectorXd ax = apply(p.x_map, s.x); // A x^{t+1}
    const double b_norm_sq = spectral_norm_sq(p.y_map);
    double eta_max = 0.0;
    for (double e : cfg.eta_y) eta_max = std::max(eta_max, e);
    const double step_l = p.g.lipschitz() + cfg.rho_x * b_norm_sq + theta * eta_max;

    auto grad_at = [&](const VectorXd& y) -> VectorXd {
        const BlockVector ybv(part, y);
        const VectorXd by = apply(p.y_map, ybv) + ax - p.b;       // A x^{t+1} + B y - b
        const BlockVector dybv(part, VectorXd(y - y_t));
        const VectorXd bdy = apply(p.y_map, dybv);                 // B (y - y^t)
        VectorXd grad = lin;
        for (int j = 0; j < part.count(); ++j) {
            const int off = part.offset(j);
            const int d = part.dim(j);
            grad.segment(off, d).noalias() +=
                p.y_map.block(j).transpose() * (cfg.rho_x * by - theta * cfg.rho_y * bdy);
            grad.segment(off, d).noalias() +=
                theta * cfg.eta_y[static_cast<std::size_t>(j)] * (y - y_t).segment(off, d);
        }
        return grad;
    };

    VectorXd y = y_t;
    double res = 0.0;
    for (long it = 0; it < kMaxInner; ++it) {
        const VectorXd grad = grad_at(y);
        VectorXd next(y.size());
        for (int j = 0; j < part.count(); ++j) {
            const int off = part.offset(j);
            const int d = part.dim(j);
            next.segment(off, d) = p.y_prox[static_cast<std::size_t>(j)].prox(
                y.segment(off, d) - grad.segment(off, d) / step_l, step_l);
        }
        res = step_l * (y - next).norm();
        y.swap(next);
        if (res <= kKktTol) return BlockVector(part, y);
    }
    throw SolverError("tilde-y inner solver did not reach KKT residual " +
                      std::to_string(kKktTol) + " within " + std::to_string(kMaxInner) +
                      " iterations (last residual " + std::to_string(res) + ")");
}

/// Regime-correct ergodic point: the single-y regime assembles
///   y_hat^t = (tilde_y^{t+1} + theta sum_{k=1..t} y^k) / (1 + theta t).
inline ErgodicPoint regime_ergodic_point(const IterateState& s, const ConstrainedProblem& p,
                                         const SolverConfig& cfg) {
    ErgodicPoint e = ergodic_point(s, cfg);
    if (cfg.regime == Regime::SingleY && p.has_y()) {
        const double theta = cfg.theta_x(p.num_x_blocks());
        const double denom = 1.0 + theta * static_cast<double>(e.t);
        const BlockVector tilde = compute_tilde_y(s, p, cfg);
        e.y_hat = BlockVector(s.y.partition(), (tilde.data() + theta * s.erg_y) / denom);
    }
    return e;
}

} // namespace blocksolve
