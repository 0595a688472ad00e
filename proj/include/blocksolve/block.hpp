#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "blocksolve/errors.hpp"

namespace blocksolve {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Partition of a dense vector into contiguous blocks. Immutable.
class BlockPartition {
public:
    BlockPartition() = default;

    explicit BlockPartition(std::vector<int> dims) : dims_(std::move(dims)) {
        offsets_.reserve(dims_.size());
        for (std::size_t i = 0; i < dims_.size(); ++i) {
            if (dims_[i] < 1)
                throw DimensionError("block " + std::to_string(i) +
                                     " has nonpositive dimension " + std::to_string(dims_[i]));
            offsets_.push_back(total_);
            total_ += dims_[i];
        }
    }

    /// `count` equal blocks of size `dim`.
    static BlockPartition uniform(int count, int dim) {
        return BlockPartition(std::vector<int>(static_cast<std::size_t>(count), dim));
    }

    int count() const { return static_cast<int>(dims_.size()); }
    int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
    int offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }
    int total_dim() const { return total_; }
    const std::vector<int>& dims() const { return dims_; }

    friend bool operator==(const BlockPartition& a, const BlockPartition& b) {
        return a.dims_ == b.dims_;
    }
    friend bool operator!=(const BlockPartition& a, const BlockPartition& b) {
        return !(a == b);
    }

private:
    std::vector<int> dims_;
    std::vector<int> offsets_;
    int total_ = 0;
};

/// Dense vector carrying its block partition. The partitioned variables
/// x and y of the solvers live here.
class BlockVector {
public:
    BlockVector() = default;

    explicit BlockVector(BlockPartition partition)
        : partition_(std::move(partition)), data_(VectorXd::Zero(partition_.total_dim())) {}

    BlockVector(BlockPartition partition, VectorXd data)
        : partition_(std::move(partition)), data_(std::move(data)) {
        if (data_.size() != partition_.total_dim())
            throw DimensionError("vector length " + std::to_string(data_.size()) +
                                 " does not match partition total " +
                                 std::to_string(partition_.total_dim()));
    }

    const BlockPartition& partition() const { return partition_; }
    int blocks() const { return partition_.count(); }
    int size() const { return static_cast<int>(data_.size()); }

    VectorXd& data() { return data_; }
    const VectorXd& data() const { return data_; }

    Eigen::VectorBlock<VectorXd> block(int i) {
        return data_.segment(partition_.offset(i), partition_.dim(i));
    }
    Eigen::VectorBlock<const VectorXd> block(int i) const {
        return data_.segment(partition_.offset(i), partition_.dim(i));
    }

private:
    BlockPartition partition_;
    VectorXd data_;
};

} // namespace blocksolve
