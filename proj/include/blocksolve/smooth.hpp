#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "blocksolve/block.hpp"
#include "blocksolve/linear_map.hpp"

namespace blocksolve {

enum class SmoothKind { Zero, Quadratic, Custom };

inline const char* to_string(SmoothKind k) {
    switch (k) {
        case SmoothKind::Zero: return "zero";
        case SmoothKind::Quadratic: return "quadratic";
        case SmoothKind::Custom: return "custom";
    }
    return "?";
}

/// Smooth coupled term (f or g) with its partial-gradient Lipschitz
/// bound. Quadratic means (1/2) x^T Q x + c^T x + c0 with Q symmetric
/// PSD; the constant c0 keeps generated objectives (e.g. the classo
/// least-squares term) exact.
class SmoothOracle {
public:
    using ValueFn = std::function<double(const VectorXd&)>;
    using GradFn = std::function<VectorXd(const VectorXd&)>;

    SmoothOracle() : kind_(SmoothKind::Zero) {}

    static SmoothOracle zero() { return SmoothOracle(); }

    static SmoothOracle quadratic(MatrixXd q, VectorXd c, double lipschitz, double c0 = 0.0) {
        if (q.rows() != q.cols()) throw DimensionError("quadratic oracle: Q must be square");
        if (q.rows() != c.size())
            throw DimensionError("quadratic oracle: Q is " + std::to_string(q.rows()) +
                                 "x" + std::to_string(q.cols()) + " but c has length " +
                                 std::to_string(c.size()));
        const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
        if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw ParameterError("quadratic oracle: Q is not symmetric to 1e-12");
        SmoothOracle s;
        s.kind_ = SmoothKind::Quadratic;
        s.q_ = std::move(q);
        s.c_ = std::move(c);
        s.c0_ = c0;
        s.lipschitz_ = lipschitz;
        return s;
    }

    static SmoothOracle custom(ValueFn value_fn, GradFn grad_fn, double lipschitz) {
        SmoothOracle s;
        s.kind_ = SmoothKind::Custom;
        s.value_fn_ = std::move(value_fn);
        s.grad_fn_ = std::move(grad_fn);
        s.lipschitz_ = lipschitz;
        return s;
    }

    SmoothKind kind() const { return kind_; }
    double lipschitz() const { return lipschitz_; }
    const MatrixXd& q() const { return q_; }
    const VectorXd& c() const { return c_; }
    double c0() const { return c0_; }

    double value(const VectorXd& x) const {
        switch (kind_) {
            case SmoothKind::Zero:
                return 0.0;
            case SmoothKind::Quadratic:
                return 0.5 * x.dot(q_ * x) + c_.dot(x) + c0_;
            case SmoothKind::Custom:
                return call_value(x);
        }
        throw ParameterError("unreachable smooth kind");
    }

    VectorXd grad(const VectorXd& x) const {
        switch (kind_) {
            case SmoothKind::Zero:
                return VectorXd::Zero(x.size());
            case SmoothKind::Quadratic:
                return q_ * x + c_;
            case SmoothKind::Custom:
                return call_grad(x);
        }
        throw ParameterError("unreachable smooth kind");
    }

    /// Gradient of block i at the full point x. Quadratic kind touches
    /// only the i-th row stripe of Q.
    VectorXd grad_block(const BlockVector& x, int i) const {
        const auto& part = x.partition();
        const int off = part.offset(i);
        const int d = part.dim(i);
        switch (kind_) {
            case SmoothKind::Zero:
                return VectorXd::Zero(d);
            case SmoothKind::Quadratic:
                return q_.middleRows(off, d) * x.data() + c_.segment(off, d);
            case SmoothKind::Custom:
                return call_grad(x.data()).segment(off, d);
        }
        throw ParameterError("unreachable smooth kind");
    }

private:
    double call_value(const VectorXd& x) const {
        try {
            return value_fn_(x);
        } catch (const std::exception& e) {
            throw SolverError(std::string("custom smooth value callback failed: ") + e.what());
        }
    }
    VectorXd call_grad(const VectorXd& x) const {
        try {
            return grad_fn_(x);
        } catch (const std::exception& e) {
            throw SolverError(std::string("custom smooth gradient callback failed: ") + e.what());
        }
    }

    SmoothKind kind_;
    MatrixXd q_;
    VectorXd c_;
    double c0_ = 0.0;
    double lipschitz_ = 0.0;
    ValueFn value_fn_;
    GradFn grad_fn_;
};

/// grad_i f(x) for each i in `indices`, evaluated at the full point x.
inline std::vector<VectorXd> partial_grad(const SmoothOracle& oracle, const BlockVector& x,
                                          const std::vector<int>& indices) {
    std::vector<VectorXd> out;
    out.reserve(indices.size());
    for (int i : indices) {
        if (i < 0 || i >= x.blocks())
            throw DimensionError("partial_grad: block index " + std::to_string(i) +
                                 " out of range [0, " + std::to_string(x.blocks()) + ")");
        out.push_back(oracle.grad_block(x, i));
    }
    return out;
}

} // namespace blocksolve
