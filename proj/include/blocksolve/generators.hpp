#pragma once

#include <string>
#include <utility>
#include <vector>

#include "blocksolve/problem.hpp"
#include "blocksolve/rng.hpp"

namespace blocksolve {

namespace detail {

inline MatrixXd random_normal_matrix(Rng& rng, int rows, int cols) {
    MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

inline VectorXd random_normal_vector(Rng& rng, int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

inline std::vector<MatrixXd> split_columns(const MatrixXd& full, const BlockPartition& part) {
    std::vector<MatrixXd> blocks;
    blocks.reserve(static_cast<std::size_t>(part.count()));
    for (int i = 0; i < part.count(); ++i)
        blocks.push_back(full.middleCols(part.offset(i), part.dim(i)));
    return blocks;
}

} // namespace detail

/// Nonnegativity constrained QP:
///     min (1/2) x^T Q x + c^T x  s.t.  A x = b, x >= 0,
/// with Q = H H^T, H of shape n x (n - rank_deficit), all data standard
/// normal from the seeded generator stream. b = A x_feas for a random
/// nonnegative x_feas, so the instance is feasible by construction; the
/// feasible point is stored on the instance. rank_deficit > 0 makes Q
/// singular.
inline ConstrainedProblem gen_ncqp(int m_size, int n_size, int num_blocks, int rank_deficit,
                                   std::uint64_t seed) {
    if (num_blocks < 1 || n_size < 1 || m_size < 0)
        throw ParameterError("gen_ncqp: sizes must be positive");
    if (n_size % num_blocks != 0)
        throw ParameterError("gen_ncqp: n = " + std::to_string(n_size) +
                             " is not divisible by blocks = " + std::to_string(num_blocks));
    if (rank_deficit < 0 || rank_deficit >= n_size)
        throw ParameterError("gen_ncqp: rank_deficit must lie in [0, n)");

    Rng rng = make_stream(seed, RngStream::Generator);
    const MatrixXd h = detail::random_normal_matrix(rng, n_size, n_size - rank_deficit);
    MatrixXd q = h * h.transpose();
    q = 0.5 * (q + q.transpose()); // exact symmetry
    const VectorXd c = detail::random_normal_vector(rng, n_size);
    const MatrixXd a_full = detail::random_normal_matrix(rng, m_size, n_size);
    VectorXd x_feas = detail::random_normal_vector(rng, n_size).cwiseAbs();

    const BlockPartition part = BlockPartition::uniform(num_blocks, n_size / num_blocks);
    const double lip = sym_lambda_max(q);
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(part, m_size, detail::split_columns(a_full, part));
    p.y_map = BlockLinearMap::empty(m_size);
    // evaluate b through the block map so the stored feasible point has a
    // bitwise-zero residual
    p.b = apply(p.x_map, BlockVector(part, x_feas));
    p.f = SmoothOracle::quadratic(std::move(q), c, lip);
    p.g = SmoothOracle::zero();
    p.x_prox.assign(static_cast<std::size_t>(num_blocks), ProxOracle::nonneg());
    p.x_feasible = x_feas;
    p.validate();
    return p;
}

/// Constrained lasso
///     min (1/2) ||A x - b||^2 + tau ||x||_1  s.t.  C x <= d
/// transformed with a slack block y >= 0 into
///     min (1/2) ||A x - b||^2 + tau sum_i ||x_i||_1
///     s.t. sum_i C_i x_i + y = d,  y >= 0.
/// The smooth term is stored exactly (including the constant ||b||^2/2).
inline ConstrainedProblem gen_classo(const MatrixXd& a, const VectorXd& b_obs, const MatrixXd& c,
                                     const VectorXd& d, double tau, int num_blocks) {
    const int p_cols = static_cast<int>(a.cols());
    if (c.cols() != p_cols)
        throw DimensionError("gen_classo: A has " + std::to_string(p_cols) + " columns but C has " +
                             std::to_string(c.cols()));
    if (a.rows() != b_obs.size())
        throw DimensionError("gen_classo: A has " + std::to_string(a.rows()) +
                             " rows but b has length " + std::to_string(b_obs.size()));
    if (c.rows() != d.size())
        throw DimensionError("gen_classo: C has " + std::to_string(c.rows()) +
                             " rows but d has length " + std::to_string(d.size()));
    if (num_blocks < 1 || num_blocks > p_cols)
        throw ParameterError("gen_classo: blocks must lie in [1, cols]");
    if (!(tau >= 0.0)) throw ParameterError("gen_classo: tau must be nonnegative");

    // Split columns as evenly as possible; the first (p mod K) blocks get
    // one extra column.
    std::vector<int> dims(static_cast<std::size_t>(num_blocks), p_cols / num_blocks);
    for (int i = 0; i < p_cols % num_blocks; ++i) dims[static_cast<std::size_t>(i)] += 1;
    const BlockPartition part{dims};

    const int n_rows = static_cast<int>(c.rows());
    MatrixXd q = a.transpose() * a;
    q = 0.5 * (q + q.transpose());
    const double lip = sym_lambda_max(q);

    ConstrainedProblem prob;
    prob.x_map = BlockLinearMap(part, n_rows, detail::split_columns(c, part));
    prob.y_map = BlockLinearMap(BlockPartition{{n_rows}}, n_rows,
                                {MatrixXd::Identity(n_rows, n_rows)});
    prob.b = d;
    prob.f = SmoothOracle::quadratic(std::move(q), -a.transpose() * b_obs, lip,
                                     0.5 * b_obs.squaredNorm());
    prob.g = SmoothOracle::zero();
    prob.x_prox.assign(static_cast<std::size_t>(num_blocks), ProxOracle::l1(tau));
    prob.y_prox.assign(1, ProxOracle::nonneg());
    prob.validate();
    return prob;
}

/// Random classo data with a nonempty feasible region (d = C x0 + |noise|).
/// Used by the CLI `generate classo` subcommand.
inline ConstrainedProblem gen_classo_random(int m_rows, int p_cols, int c_rows, double tau,
                                            int num_blocks, std::uint64_t seed) {
    Rng rng = make_stream(seed, RngStream::Generator);
    const MatrixXd a = detail::random_normal_matrix(rng, m_rows, p_cols);
    const VectorXd b_obs = detail::random_normal_vector(rng, m_rows);
    const MatrixXd c = detail::random_normal_matrix(rng, c_rows, p_cols);
    const VectorXd x0 = detail::random_normal_vector(rng, p_cols);
    const VectorXd slack = detail::random_normal_vector(rng, c_rows).cwiseAbs();
    const VectorXd d = c * x0 + slack;
    return gen_classo(a, b_obs, c, d, tau, num_blocks);
}

} // namespace blocksolve
