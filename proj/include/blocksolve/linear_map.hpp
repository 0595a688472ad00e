#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "blocksolve/block.hpp"

namespace blocksolve {

/// Block-column linear map A = (A_1, ..., A_N): each block A_i maps the
/// i-th block of a partitioned vector into a common row space of
/// dimension `rows`. A map with zero blocks is a valid empty map (used
/// when the problem has no y side).
class BlockLinearMap {
public:
    BlockLinearMap() = default;

    BlockLinearMap(BlockPartition partition, int rows, std::vector<MatrixXd> blocks)
        : partition_(std::move(partition)), rows_(rows), blocks_(std::move(blocks)) {
        if (rows_ < 0) throw DimensionError("row dimension must be nonnegative");
        if (static_cast<int>(blocks_.size()) != partition_.count())
            throw DimensionError("map has " + std::to_string(blocks_.size()) +
                                 " blocks but partition has " +
                                 std::to_string(partition_.count()));
        for (int i = 0; i < partition_.count(); ++i) {
            const auto& m = blocks_[static_cast<std::size_t>(i)];
            if (m.rows() != rows_ || m.cols() != partition_.dim(i))
                throw DimensionError("block " + std::to_string(i) + " is " +
                                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                     ", expected " + std::to_string(rows_) + "x" +
                                     std::to_string(partition_.dim(i)));
        }
    }

    /// Empty map (no blocks) into a row space of dimension `rows`.
    static BlockLinearMap empty(int rows) {
        return BlockLinearMap(BlockPartition{}, rows, {});
    }

    /// Identity-block map: every block is the `dim` x `dim` identity.
    static BlockLinearMap identity_blocks(int count, int dim) {
        std::vector<MatrixXd> blocks(static_cast<std::size_t>(count),
                                     MatrixXd::Identity(dim, dim));
        return BlockLinearMap(BlockPartition::uniform(count, dim), dim, std::move(blocks));
    }

    const BlockPartition& partition() const { return partition_; }
    int rows() const { return rows_; }
    int blocks() const { return partition_.count(); }
    const MatrixXd& block(int i) const { return blocks_[static_cast<std::size_t>(i)]; }

    friend bool operator==(const BlockLinearMap& a, const BlockLinearMap& b) {
        if (a.partition_ != b.partition_ || a.rows_ != b.rows_) return false;
        for (std::size_t i = 0; i < a.blocks_.size(); ++i)
            if (a.blocks_[i] != b.blocks_[i]) return false;
        return true;
    }

private:
    BlockPartition partition_;
    int rows_ = 0;
    std::vector<MatrixXd> blocks_;
};

/// Sum_i A_i v_i. Accumulation runs in ascending block index order so that
/// serial and parallel callers see bitwise-identical results.
inline VectorXd apply(const BlockLinearMap& map, const BlockVector& v) {
    if (v.partition() != map.partition()) {
        for (int i = 0; i < std::min(map.blocks(), v.blocks()); ++i)
            if (map.partition().dim(i) != v.partition().dim(i))
                throw DimensionError("apply: block " + std::to_string(i) + " has dimension " +
                                     std::to_string(v.partition().dim(i)) + ", map expects " +
                                     std::to_string(map.partition().dim(i)));
        throw DimensionError("apply: vector has " + std::to_string(v.blocks()) +
                             " blocks, map has " + std::to_string(map.blocks()));
    }
    VectorXd out = VectorXd::Zero(map.rows());
    for (int i = 0; i < map.blocks(); ++i) out.noalias() += map.block(i) * v.block(i);
    return out;
}

/// A_i^T lambda.
inline VectorXd apply_adjoint_block(const BlockLinearMap& map, int i, const VectorXd& lambda) {
    if (i < 0 || i >= map.blocks())
        throw DimensionError("adjoint: block index " + std::to_string(i) + " out of range [0, " +
                             std::to_string(map.blocks()) + ")");
    if (lambda.size() != map.rows())
        throw DimensionError("adjoint: vector length " + std::to_string(lambda.size()) +
                             " does not match row dimension " + std::to_string(map.rows()));
    return map.block(i).transpose() * lambda;
}

namespace detail {

/// Largest eigenvalue of M^T M by power iteration with a deterministic
/// all-ones start (no RNG coupling). The all-ones vector can be exactly
/// orthogonal to the dominant eigenvector on structured matrices; if the
/// first iterate collapses to zero on a nonzero matrix we restart once
/// from e_1.
template <class ApplyMtM>
double power_iteration_sq(const ApplyMtM& mtm_apply, int dim, double frob_sq) {
    if (dim == 0 || frob_sq == 0.0) return 0.0;
    constexpr int kMaxIters = 1000;
    constexpr double kRelTol = 1e-8;
    VectorXd v = VectorXd::Ones(dim);
    v /= v.norm();
    double lam = 0.0;
    bool restarted = false;
    for (int it = 0; it < kMaxIters; ++it) {
        VectorXd w = mtm_apply(v);
        const double wn = w.norm();
        if (wn <= frob_sq * 1e-300 || wn == 0.0) {
            if (!restarted) {
                restarted = true;
                v = VectorXd::Unit(dim, 0);
                lam = 0.0;
                continue;
            }
            return 0.0;
        }
        v = w / wn;
        const double lam_next = v.dot(mtm_apply(v));
        if (std::abs(lam_next - lam) <= kRelTol * std::abs(lam_next)) return lam_next;
        lam = lam_next;
    }
    return lam;
}

} // namespace detail

/// lambda_max(A_i^T A_i), i.e. the squared spectral norm of block i.
inline double spectral_norm_sq(const BlockLinearMap& map, int i) {
    if (i < 0 || i >= map.blocks())
        throw DimensionError("spectral_norm_sq: block index " + std::to_string(i) +
                             " out of range [0, " + std::to_string(map.blocks()) + ")");
    const MatrixXd& a = map.block(i);
    const double frob_sq = a.squaredNorm();
    return detail::power_iteration_sq(
        [&a](const VectorXd& v) -> VectorXd { return a.transpose() * (a * v); },
        static_cast<int>(a.cols()), frob_sq);
}

/// lambda_max(A^T A) of the whole map.
inline double spectral_norm_sq(const BlockLinearMap& map) {
    double frob_sq = 0.0;
    for (int i = 0; i < map.blocks(); ++i) frob_sq += map.block(i).squaredNorm();
    const int dim = map.partition().total_dim();
    return detail::power_iteration_sq(
        [&map](const VectorXd& v) -> VectorXd {
            BlockVector bv(map.partition(), v);
            VectorXd y = apply(map, bv);
            VectorXd out(map.partition().total_dim());
            for (int i = 0; i < map.blocks(); ++i)
                out.segment(map.partition().offset(i), map.partition().dim(i)) =
                    map.block(i).transpose() * y;
            return out;
        },
        dim, frob_sq);
}

/// lambda_max of a symmetric PSD matrix (same power iteration).
inline double sym_lambda_max(const MatrixXd& q) {
    return detail::power_iteration_sq([&q](const VectorXd& v) -> VectorXd { return q * v; },
                                      static_cast<int>(q.cols()), q.squaredNorm());
}

} // namespace blocksolve
