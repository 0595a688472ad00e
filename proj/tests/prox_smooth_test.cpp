#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace blocksolve;
using bstest::random_vector;

namespace {
VectorXd scalar(double v) {
    VectorXd x(1);
    x << v;
    return x;
}
} // namespace

TEST(Prox, SoftThreshold) {
    // l1(tau=1), v = 3, eta = 1 -> 2
    const ProxOracle p = ProxOracle::l1(1.0);
    EXPECT_DOUBLE_EQ(p.prox(scalar(3.0), 1.0)(0), 2.0);
}

TEST(Prox, NonnegProjection) {
    const ProxOracle p = ProxOracle::nonneg();
    VectorXd v(2);
    v << -1, 2;
    const VectorXd out = p.prox(v, 0.5);
    EXPECT_DOUBLE_EQ(out(0), 0.0);
    EXPECT_DOUBLE_EQ(out(1), 2.0);
}

TEST(Prox, L1NonnegAgainstGridOracle) {
    // l1nonneg(tau=0.5), v = 0.75, eta = 2 -> 0.5; oracle: 1e-6 grid over
    // u(z) + indicator(z) + (eta/2)(z - v)^2
    const ProxOracle p = ProxOracle::l1_nonneg(0.5);
    const double got = p.prox(scalar(0.75), 2.0)(0);
    EXPECT_NEAR(got, 0.5, 1e-12);

    double best_z = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (double z = -2.0; z <= 2.0; z += 1e-6) {
        if (z < 0.0) continue;
        const double val = 0.5 * z + 1.0 * (z - 0.75) * (z - 0.75);
        if (val < best_val) {
            best_val = val;
            best_z = z;
        }
    }
    EXPECT_NEAR(got, best_z, 2e-6);
}

TEST(Prox, KinkTieBreakReturnsZero) {
    // at the soft-threshold kink, the returned point is exactly 0
    const ProxOracle p = ProxOracle::l1(1.0);
    EXPECT_EQ(p.prox(scalar(1.0), 1.0)(0), 0.0);
    EXPECT_EQ(p.prox(scalar(-1.0), 1.0)(0), 0.0);
}

TEST(Prox, NonpositiveEtaRejected) {
    const ProxOracle p = ProxOracle::l1(1.0);
    EXPECT_THROW(p.prox(scalar(1.0), 0.0), ParameterError);
    EXPECT_THROW(p.prox(scalar(1.0), -1.0), ParameterError);
}

TEST(Prox, VariationalInequalityOnCatalog) {
    // prox output attains the subproblem minimum against sampled points
    Rng rng(5);
    const std::vector<ProxOracle> catalog = {
        ProxOracle::zero(),          ProxOracle::l1(0.7), ProxOracle::nonneg(),
        ProxOracle::box(-0.5, 1.25), ProxOracle::l1_nonneg(0.3)};
    for (const auto& p : catalog) {
        for (int trial = 0; trial < 40; ++trial) {
            const int d = 1 + static_cast<int>(rng.uniform_int(3));
            const VectorXd v = random_vector(rng, d);
            const double eta = 0.1 + 3.0 * rng.uniform();
            const VectorXd px = p.prox(v, eta);
            const double at_prox = p.value(px, 1e-12) + 0.5 * eta * (px - v).squaredNorm();
            for (int s = 0; s < 25; ++s) {
                const VectorXd z = random_vector(rng, d);
                const double at_z = p.value(z, 0.0) + 0.5 * eta * (z - v).squaredNorm();
                EXPECT_LE(at_prox, at_z + 1e-9);
            }
        }
    }
}

TEST(Prox, ProjectionsIdempotent) {
    Rng rng(6);
    const std::vector<ProxOracle> indicators = {ProxOracle::zero(), ProxOracle::nonneg(),
                                                ProxOracle::box(-1.0, 2.0),
                                                ProxOracle::l1(0.0)};
    for (const auto& p : indicators) {
        ASSERT_TRUE(p.indicator_only());
        for (int trial = 0; trial < 50; ++trial) {
            const VectorXd v = random_vector(rng, 3);
            const double eta = 0.2 + rng.uniform();
            const VectorXd once = p.prox(v, eta);
            const VectorXd twice = p.prox(once, eta);
            EXPECT_DOUBLE_EQ((once - twice).norm(), 0.0);
        }
    }
}

TEST(Smooth, PartialGradQuadraticIdentity) {
    // Q = I, c = 0: grad restricted to I is x restricted to I
    const int n = 4;
    const SmoothOracle f =
        SmoothOracle::quadratic(MatrixXd::Identity(n, n), VectorXd::Zero(n), 1.0);
    BlockVector x(BlockPartition::uniform(4, 1));
    x.data() << 1, -2, 3, 0.5;
    const auto grads = partial_grad(f, x, {1, 3});
    EXPECT_DOUBLE_EQ(grads[0](0), -2.0);
    EXPECT_DOUBLE_EQ(grads[1](0), 0.5);
}

TEST(Smooth, PartialGradZeroKind) {
    const SmoothOracle f = SmoothOracle::zero();
    BlockVector x(BlockPartition::uniform(3, 2), VectorXd::Ones(6));
    for (const auto& g : partial_grad(f, x, {0, 2})) EXPECT_DOUBLE_EQ(g.norm(), 0.0);
}

TEST(Smooth, PartialGradSliceOfFullGradient) {
    // Q = [[2,1],[1,2]], c = (1,0), x = (1,1), I = {0} -> (2+1+1) = 4
    MatrixXd q(2, 2);
    q << 2, 1, 1, 2;
    VectorXd c(2);
    c << 1, 0;
    const SmoothOracle f = SmoothOracle::quadratic(q, c, 3.0);
    BlockVector x(BlockPartition::uniform(2, 1), VectorXd::Ones(2));
    const auto grads = partial_grad(f, x, {0});
    EXPECT_DOUBLE_EQ(grads[0](0), 4.0);
    const VectorXd full = q * x.data() + c;
    EXPECT_DOUBLE_EQ(grads[0](0), full(0));
}

TEST(Smooth, FiniteDifferenceCheck) {
    Rng rng(9);
    MatrixXd m = bstest::random_matrix(rng, 5, 5);
    MatrixXd q = m.transpose() * m;
    q = 0.5 * (q + q.transpose());
    const VectorXd c = random_vector(rng, 5);
    const SmoothOracle f = SmoothOracle::quadratic(q, c, sym_lambda_max(q));
    const VectorXd x = random_vector(rng, 5);
    const VectorXd g = f.grad(x);
    const double h = 1e-6;
    for (int i = 0; i < 5; ++i) {
        VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        const double fd = (f.value(xp) - f.value(xm)) / (2 * h);
        EXPECT_NEAR(fd, g(i), 1e-4 * std::max(1.0, std::abs(g(i))));
    }
}

TEST(Smooth, AsymmetricQRejected) {
    MatrixXd q(2, 2);
    q << 1, 0.5, 0.2, 1;
    EXPECT_THROW(SmoothOracle::quadratic(q, VectorXd::Zero(2), 1.0), ParameterError);
}

TEST(Smooth, CustomCallbackFailurePropagatesWithContext) {
    const SmoothOracle f = SmoothOracle::custom(
        [](const VectorXd&) -> double { throw std::runtime_error("boom"); },
        [](const VectorXd&) -> VectorXd { throw std::runtime_error("boom"); }, 1.0);
    try {
        f.grad(VectorXd::Zero(2));
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_NE(std::string(e.what()).find("custom"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
    }
}

TEST(Objective, ZeroOracles) {
    ConstrainedProblem p;
    p.x_map = BlockLinearMap::identity_blocks(2, 1);
    p.y_map = BlockLinearMap::empty(1);
    p.b = VectorXd::Zero(1);
    p.x_prox = {ProxOracle::zero(), ProxOracle::zero()};
    p.validate();
    Rng rng(3);
    BlockVector x(p.x_map.partition(), random_vector(rng, 2));
    EXPECT_DOUBLE_EQ(objective(p, x), 0.0);
}

TEST(Objective, L1SingleBlock) {
    // l1(tau=1) on x = (1, -2) with zero smooth -> 3
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({2}), 1, {MatrixXd::Zero(1, 2)});
    p.y_map = BlockLinearMap::empty(1);
    p.b = VectorXd::Zero(1);
    p.x_prox = {ProxOracle::l1(1.0)};
    p.validate();
    BlockVector x(p.x_map.partition());
    x.data() << 1, -2;
    EXPECT_DOUBLE_EQ(objective(p, x), 3.0);
}

TEST(Objective, NcqpQuadraticFormOracle) {
    const ConstrainedProblem p = gen_ncqp(4, 12, 3, 0, 123);
    const BlockVector zero(p.x_map.partition());
    EXPECT_DOUBLE_EQ(objective(p, zero), 0.0);
    const BlockVector ones(p.x_map.partition(), VectorXd::Ones(12));
    const double expected = 0.5 * VectorXd::Ones(12).dot(p.f.q() * VectorXd::Ones(12)) +
                            p.f.c().dot(VectorXd::Ones(12));
    EXPECT_NEAR(objective(p, ones), expected, 1e-12 * std::max(1.0, std::abs(expected)));
}

TEST(Objective, InfiniteOutsideSet) {
    ConstrainedProblem p;
    p.x_map = BlockLinearMap::identity_blocks(1, 2);
    p.y_map = BlockLinearMap::empty(2);
    p.b = VectorXd::Zero(2);
    p.x_prox = {ProxOracle::nonneg()};
    p.validate();
    BlockVector x(p.x_map.partition());
    x.data() << -1, 1;
    EXPECT_TRUE(std::isinf(objective(p, x)));
    x.data() << -0.5e-9, 1; // inside the 1e-9 membership tolerance
    EXPECT_TRUE(std::isfinite(objective(p, x)));
}

TEST(FeasViolation, FeasiblePointIsZero) {
    const ConstrainedProblem p = gen_ncqp(3, 6, 2, 0, 5);
    ASSERT_TRUE(p.x_feasible.has_value());
    const BlockVector x(p.x_map.partition(), *p.x_feasible);
    EXPECT_DOUBLE_EQ(feas_violation(p, x), 0.0);

    ConstrainedProblem q;
    q.x_map = BlockLinearMap::identity_blocks(1, 2);
    q.y_map = BlockLinearMap::empty(2);
    q.b = VectorXd::Zero(2);
    q.x_prox = {ProxOracle::zero()};
    EXPECT_DOUBLE_EQ(feas_violation(q, BlockVector(q.x_map.partition())), 0.0);
}

TEST(FeasViolation, ScalarArithmetic) {
    // 1-D instance A = 2, b = 3, x = 1 -> |2 - 3| = 1
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({1}), 1, {2.0 * MatrixXd::Identity(1, 1)});
    p.y_map = BlockLinearMap::empty(1);
    p.b = scalar(3.0);
    p.x_prox = {ProxOracle::zero()};
    BlockVector x(p.x_map.partition(), scalar(1.0));
    EXPECT_DOUBLE_EQ(feas_violation(p, x), 1.0);
}
