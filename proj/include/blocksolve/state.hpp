#pragma once

#include "blocksolve/problem.hpp"

namespace blocksolve {

/// Mutable loop state. x and y are the current (last) iterates x^k, y^k;
/// erg_x / erg_y hold the running sums sum_{kappa=1..k-1} of past
/// iterates (x^0 is excluded from ergodic averages). werg_x / walpha_sum
/// are the alpha-weighted analogues used by the stochastic engine, with
/// the scalar weight sum kept compensated. prev_y / prev_lambda retain
/// y^{k-1}, lambda^{k-1} for the single-y ergodic subproblem.
struct IterateState {
    BlockVector x;
    BlockVector y;
    VectorXd lambda;
    VectorXd r; // maintained residual A x + B y - b
    long k = 0;

    VectorXd erg_x;
    VectorXd erg_y;

    VectorXd werg_x;
    double walpha_sum = 0.0;
    double walpha_comp = 0.0; // Kahan compensation for walpha_sum

    BlockVector prev_y;
    VectorXd prev_lambda;

    long residual_checks = 0; // completed periodic consistency checks
};

/// Ergodic average point; t is the averaging horizon (state at k = t+1).
struct ErgodicPoint {
    BlockVector x_hat;
    BlockVector y_hat; // empty when the problem has no y side
    long t = 0;
};

/// lambda^0 = 0, r^0 = A x^0 + B y^0 - b, counters and sums zeroed.
inline IterateState init_state(const ConstrainedProblem& p, const BlockVector& x0,
                               const BlockVector& y0) {
    if (x0.partition() != p.x_map.partition())
        throw DimensionError("init_state: x0 partition does not match the problem");
    if (y0.partition() != p.y_map.partition())
        throw DimensionError("init_state: y0 partition does not match the problem");
    IterateState s;
    s.x = x0;
    s.y = y0;
    s.lambda = VectorXd::Zero(p.rows());
    s.r = apply(p.x_map, x0) + apply(p.y_map, y0) - p.b;
    s.erg_x = VectorXd::Zero(x0.size());
    s.erg_y = VectorXd::Zero(y0.size());
    s.werg_x = VectorXd::Zero(x0.size());
    s.prev_y = y0;
    s.prev_lambda = s.lambda;
    return s;
}

inline IterateState init_state(const ConstrainedProblem& p, const BlockVector& x0) {
    return init_state(p, x0, BlockVector(p.y_map.partition()));
}

inline IterateState init_state(const ConstrainedProblem& p) {
    return init_state(p, BlockVector(p.x_map.partition()), BlockVector(p.y_map.partition()));
}

} // namespace blocksolve
