#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "blocksolve/baselines.hpp"
#include "blocksolve/rpdbus.hpp"
#include "blocksolve/trace.hpp"

namespace blocksolve {

/// Callback contract: (k, state, last metrics row) -> keep going?
using RunCallback = std::function<bool(long, const IterateState&, const TraceRow*)>;

struct RunOptions {
    long cadence = 0; // 0: once per epoch (N/n iterations)
    int workers = 1;
    std::optional<BlockVector> x0;
    std::optional<BlockVector> y0;
    RunCallback callback;
};

/// Outcome of a run; on error the partial trace and last state are
/// retained and `error` carries the message.
struct RunResult {
    Trace trace;
    IterateState state;
    bool failed = false;
    std::string error;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline long effective_cadence(const RunOptions& opts, const ConstrainedProblem& p, int n) {
    if (opts.cadence > 0) return opts.cadence;
    return std::max<long>(1, p.num_x_blocks() / std::max(1, n));
}

inline TraceRow metrics_row(const ConstrainedProblem& p, const SolverConfig& cfg,
                            const IterateState& s, const ErgodicPoint& erg, double wall) {
    TraceRow row;
    row.k = s.k;
    row.epoch = static_cast<double>(s.k) * cfg.theta_x(p.num_x_blocks());
    row.obj_last = objective(p, s.x, s.y);
    row.feas_last = feas_violation(p, s.x, s.y);
    row.obj_erg = objective(p, erg.x_hat, erg.y_hat);
    row.feas_erg = feas_violation(p, erg.x_hat, erg.y_hat);
    row.wall_s = wall;
    return row;
}

inline TraceRow initial_row(const ConstrainedProblem& p, const SolverConfig& cfg,
                            const IterateState& s) {
    // Before the first step the ergodic point is the initial point itself.
    TraceRow row;
    row.k = 0;
    row.epoch = 0.0;
    row.obj_last = objective(p, s.x, s.y);
    row.feas_last = feas_violation(p, s.x, s.y);
    row.obj_erg = row.obj_last;
    row.feas_erg = row.feas_last;
    row.wall_s = 0.0;
    (void)cfg;
    return row;
}

/// Shared driver: `do_step` advances the state once, `make_ergodic`
/// builds the regime-correct average for metric rows.
template <class StepFn, class ErgFn>
RunResult drive_loop(const ConstrainedProblem& p, const SolverConfig& cfg, IterateState state,
                     const RunOptions& opts, StepFn&& do_step, ErgFn&& make_ergodic) {
    RunResult res;
    const long cadence = effective_cadence(opts, p, cfg.n);
    const auto t0 = Clock::now();
    try {
        if (cfg.max_iters > 0) {
            res.trace.rows.push_back(initial_row(p, cfg, state));
            if (opts.callback && !opts.callback(0, state, &res.trace.rows.back())) {
                res.state = std::move(state);
                return res;
            }
        }
        for (long k = 1; k <= cfg.max_iters; ++k) {
            do_step(state);
            if (state.k % cadence == 0 || state.k == cfg.max_iters) {
                const ErgodicPoint erg = make_ergodic(state);
                res.trace.rows.push_back(metrics_row(p, cfg, state, erg, seconds_since(t0)));
                if (opts.callback && !opts.callback(state.k, state, &res.trace.rows.back())) break;
            }
        }
    } catch (const std::exception& e) {
        res.failed = true;
        res.error = e.what();
    }
    res.state = std::move(state);
    return res;
}

} // namespace detail

/// Runs the randomized block update method for cfg.max_iters iterations,
/// recording metric rows (last iterate + regime-correct ergodic point)
/// once per cadence. Deterministic for a given cfg.seed.
inline RunResult run_rpdbu(const ConstrainedProblem& p, const SolverConfig& cfg,
                           const RunOptions& opts = {}) {
    p.validate();
    IterateState state = opts.x0 ? (opts.y0 ? init_state(p, *opts.x0, *opts.y0)
                                            : init_state(p, *opts.x0))
                                 : init_state(p);
    Rng rng = make_stream(cfg.seed, RngStream::Sampling);
    return detail::drive_loop(
        p, cfg, std::move(state), opts,
        [&](IterateState& s) { step(s, p, cfg, rng, opts.workers); },
        [&](const IterateState& s) { return regime_ergodic_point(s, p, cfg); });
}

/// Runs the stochastic variant: requires a feasible start (A x0 = b) and
/// a no-y problem. The ergodic columns use the alpha-weighted average.
inline RunResult run_rpdbus(const ConstrainedProblem& p, const SolverConfig& cfg,
                            const StepSchedule& schedule, const StochasticOracle& oracle,
                            const RunOptions& opts = {}) {
    p.validate();
    if (!opts.x0 && !p.x_feasible)
        throw ParameterError("run_rpdbus: no start point; the stochastic engine needs x0 with "
                             "A x0 = b (problem carries no feasible point)");
    const BlockVector x0 = opts.x0 ? *opts.x0 : BlockVector(p.x_map.partition(), *p.x_feasible);
    IterateState state = init_stochastic_state(p, x0);
    Rng sampling = make_stream(cfg.seed, RngStream::Sampling);
    Rng noise = make_stream(cfg.seed, RngStream::Noise);
    return detail::drive_loop(
        p, cfg, std::move(state), opts,
        [&](IterateState& s) {
            stochastic_step(s, p, cfg, schedule, oracle, sampling, noise, opts.workers);
        },
        [&](const IterateState& s) { return weighted_ergodic(s, schedule, cfg); });
}

/// Runs one of the deterministic reference methods; ergodic columns use
/// the theta = 1 plain average.
inline RunResult run_baseline(const ConstrainedProblem& p, BaselineKind kind,
                              const BaselineParams& bp, long max_iters,
                              const RunOptions& opts = {}) {
    p.validate();
    SolverConfig cfg = detail::baseline_as_config(p, bp);
    cfg.max_iters = max_iters;
    IterateState state = opts.x0 ? (opts.y0 ? init_state(p, *opts.x0, *opts.y0)
                                            : init_state(p, *opts.x0))
                                 : init_state(p);
    auto do_step = [&](IterateState& s) {
        switch (kind) {
            case BaselineKind::LinearizedALM:
                linearized_alm_step(s, p, bp, opts.workers);
                break;
            case BaselineKind::CyclicLinearizedADMM:
                cyclic_linearized_admm_step(s, p, bp);
                break;
            case BaselineKind::ProxJADMM:
                prox_jadmm_step(s, p, bp, bp.gamma, opts.workers);
                break;
            case BaselineKind::TwoBlockADMM:
                two_block_admm_step(s, p, bp.rho);
                break;
        }
    };
    return detail::drive_loop(p, cfg, std::move(state), opts, do_step,
                              [&](const IterateState& s) { return ergodic_point(s, cfg); });
}

} // namespace blocksolve
