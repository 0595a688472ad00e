#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blocksolve/block.hpp"
#include "blocksolve/linear_map.hpp"
#include "blocksolve/prox.hpp"
#include "blocksolve/smooth.hpp"

namespace blocksolve {

/// A full instance of
///     min f(x) + sum_i u_i(x_i) + g(y) + sum_j v_j(y_j)
///     s.t. sum_i A_i x_i + sum_j B_j y_j = b,  x_i in X_i,  y_j in Y_j.
///
/// A problem with no y side carries an empty y_map (zero blocks) so the
/// solvers need no special casing. Instances are immutable after
/// construction and safe for concurrent reads.
struct ConstrainedProblem {
    BlockLinearMap x_map;              // A
    BlockLinearMap y_map;              // B (possibly empty)
    VectorXd b;
    SmoothOracle f;
    SmoothOracle g;
    std::vector<ProxOracle> x_prox;    // u_i + indicator of X_i
    std::vector<ProxOracle> y_prox;    // v_j + indicator of Y_j
    std::optional<VectorXd> x_feasible; // a point with A x = b, when known

    int num_x_blocks() const { return x_map.blocks(); }
    int num_y_blocks() const { return y_map.blocks(); }
    bool has_y() const { return y_map.blocks() > 0; }
    int rows() const { return static_cast<int>(b.size()); }

    void validate() const {
        if (x_map.rows() != b.size() || y_map.rows() != b.size())
            throw DimensionError("constraint maps have row dimensions " +
                                 std::to_string(x_map.rows()) + " / " +
                                 std::to_string(y_map.rows()) + " but b has length " +
                                 std::to_string(b.size()));
        if (static_cast<int>(x_prox.size()) != x_map.blocks())
            throw DimensionError("x prox list has " + std::to_string(x_prox.size()) +
                                 " entries for " + std::to_string(x_map.blocks()) + " blocks");
        if (static_cast<int>(y_prox.size()) != y_map.blocks())
            throw DimensionError("y prox list has " + std::to_string(y_prox.size()) +
                                 " entries for " + std::to_string(y_map.blocks()) + " blocks");
        if (x_feasible && x_feasible->size() != x_map.partition().total_dim())
            throw DimensionError("feasible point length does not match x dimension");
    }
};

/// f(x) + sum u_i(x_i) + g(y) + sum v_j(y_j); +inf when any block lies
/// outside its set (membership tolerance 1e-9, absolute).
inline double objective(const ConstrainedProblem& p, const BlockVector& x, const BlockVector& y) {
    if (x.partition() != p.x_map.partition() || y.partition() != p.y_map.partition())
        throw DimensionError("objective: point partitions do not match the problem");
    double total = p.f.value(x.data()) + p.g.value(y.data());
    for (int i = 0; i < x.blocks(); ++i) {
        total += p.x_prox[static_cast<std::size_t>(i)].value(x.block(i));
        if (!std::isfinite(total)) return total;
    }
    for (int j = 0; j < y.blocks(); ++j) {
        total += p.y_prox[static_cast<std::size_t>(j)].value(y.block(j));
        if (!std::isfinite(total)) return total;
    }
    return total;
}

inline double objective(const ConstrainedProblem& p, const BlockVector& x) {
    return objective(p, x, BlockVector(p.y_map.partition()));
}

/// ||A x + B y - b||_2.
inline double feas_violation(const ConstrainedProblem& p, const BlockVector& x,
                             const BlockVector& y) {
    VectorXd r = apply(p.x_map, x) + apply(p.y_map, y) - p.b;
    return r.norm();
}

inline double feas_violation(const ConstrainedProblem& p, const BlockVector& x) {
    return feas_violation(p, x, BlockVector(p.y_map.partition()));
}

} // namespace blocksolve
