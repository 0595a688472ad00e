#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace blocksolve;
using bstest::random_matrix;
using bstest::random_orthonormal;
using bstest::random_vector;

namespace {

VectorXd scalar(double v) {
    VectorXd x(1);
    x << v;
    return x;
}

/// Separable instance: f = 0, l1 blocks, dense A.
ConstrainedProblem separable_problem(Rng& rng, int nb, int rows, double tau) {
    ConstrainedProblem p;
    std::vector<MatrixXd> xb;
    for (int i = 0; i < nb; ++i) xb.push_back(random_matrix(rng, rows, 1));
    p.x_map = BlockLinearMap(BlockPartition::uniform(nb, 1), rows, std::move(xb));
    p.y_map = BlockLinearMap::empty(rows);
    p.b = random_vector(rng, rows);
    p.x_prox.assign(static_cast<std::size_t>(nb), ProxOracle::l1(tau));
    p.validate();
    return p;
}

SolverConfig full_sample_config(const ConstrainedProblem& p, const BaselineParams& bp) {
    SolverConfig cfg;
    cfg.regime = p.has_y() ? Regime::MultiXY : Regime::NoY;
    cfg.n = p.num_x_blocks();
    cfg.m = p.num_y_blocks();
    cfg.rho_x = cfg.rho_y = cfg.rho = bp.rho;
    cfg.eta_x = bp.eta_x;
    cfg.eta_y = bp.eta_y;
    return cfg;
}

} // namespace

TEST(LinearizedAlm, MatchesFullSamplingEngineBitwise) {
    Rng rng(1);
    ConstrainedProblem p = separable_problem(rng, 5, 3, 0.3);
    const BaselineParams bp = derive_baseline_params(p, 0.9);
    IterateState a = init_state(p, BlockVector(p.x_map.partition(), random_vector(rng, 5)));
    IterateState b = a;
    SolverConfig cfg = full_sample_config(p, bp);
    Rng srng = make_stream(5, RngStream::Sampling);
    for (int it = 0; it < 10; ++it) {
        linearized_alm_step(a, p, bp);
        step(b, p, cfg, srng);
        ASSERT_EQ(a.x.data(), b.x.data()) << "iteration " << it;
        ASSERT_EQ(a.lambda, b.lambda);
    }
}

TEST(LinearizedAlm, SingleBlockIsProximalGradientAlmStep) {
    // N = 1: x <- prox(x - (grad f - A^T lam + rho A^T r)/eta)
    Rng rng(2);
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({2}), 2, {random_matrix(rng, 2, 2)});
    p.y_map = BlockLinearMap::empty(2);
    p.b = random_vector(rng, 2);
    MatrixXd q = random_matrix(rng, 2, 2);
    q = q.transpose() * q;
    q = 0.5 * (q + q.transpose());
    p.f = SmoothOracle::quadratic(q, random_vector(rng, 2), sym_lambda_max(q));
    p.x_prox = {ProxOracle::l1(0.4)};
    p.validate();
    const BaselineParams bp = derive_baseline_params(p, 0.7);
    IterateState s = init_state(p, BlockVector(p.x_map.partition(), random_vector(rng, 2)));
    const VectorXd x0 = s.x.data();
    const VectorXd r0 = s.r;
    const VectorXd lam0 = s.lambda;
    linearized_alm_step(s, p, bp);
    const VectorXd d = q * x0 + p.f.c() +
                       p.x_map.block(0).transpose() * (bp.rho * r0 - lam0);
    const VectorXd expected =
        p.x_prox[0].prox(x0 - d / bp.eta_x[0], bp.eta_x[0]);
    EXPECT_EQ(s.x.data(), expected);
}

TEST(LinearizedAlm, HandComputedTwoBlocks) {
    // A = (1, 1), b = 1, f = 0, u = 0, rho = 1, eta = 2:
    // both blocks move to 0.5, r1 = 0, lambda1 = 0
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({1, 1}), 1,
                             {MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1)});
    p.y_map = BlockLinearMap::empty(1);
    p.b = scalar(1.0);
    p.x_prox = {ProxOracle::zero(), ProxOracle::zero()};
    BaselineParams bp;
    bp.rho = 1.0;
    bp.eta_x = {2.0, 2.0};
    IterateState s = init_state(p);
    linearized_alm_step(s, p, bp);
    EXPECT_DOUBLE_EQ(s.x.data()(0), 0.5);
    EXPECT_DOUBLE_EQ(s.x.data()(1), 0.5);
    EXPECT_DOUBLE_EQ(s.r(0), 0.0);
    EXPECT_DOUBLE_EQ(s.lambda(0), 0.0);
}

TEST(CyclicLadmm, SingleBlockEqualsLalm) {
    Rng rng(3);
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({3}), 2, {random_matrix(rng, 2, 3)});
    p.y_map = BlockLinearMap::empty(2);
    p.b = random_vector(rng, 2);
    p.x_prox = {ProxOracle::nonneg()};
    p.validate();
    const BaselineParams bp = derive_baseline_params(p, 1.2);
    IterateState a = init_state(p, BlockVector(p.x_map.partition(), random_vector(rng, 3)));
    IterateState b = a;
    for (int it = 0; it < 5; ++it) {
        cyclic_linearized_admm_step(a, p, bp);
        linearized_alm_step(b, p, bp);
        ASSERT_EQ(a.x.data(), b.x.data());
        ASSERT_EQ(a.lambda, b.lambda);
    }
}

TEST(CyclicLadmm, HandComputedGaussSeidel) {
    // A = (1, 1), b = 1, eta = 2, rho = 1: x1 = 0.5 (r refreshes to
    // -0.5), x2 = 0.25, r = -0.25, lambda = 0.25
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({1, 1}), 1,
                             {MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1)});
    p.y_map = BlockLinearMap::empty(1);
    p.b = scalar(1.0);
    p.x_prox = {ProxOracle::zero(), ProxOracle::zero()};
    BaselineParams bp;
    bp.rho = 1.0;
    bp.eta_x = {2.0, 2.0};
    IterateState s = init_state(p);
    cyclic_linearized_admm_step(s, p, bp);
    EXPECT_DOUBLE_EQ(s.x.data()(0), 0.5);
    EXPECT_DOUBLE_EQ(s.x.data()(1), 0.25);
    EXPECT_DOUBLE_EQ(s.r(0), -0.25);
    EXPECT_DOUBLE_EQ(s.lambda(0), 0.25);
}

TEST(CyclicLadmm, ResidualConsistentAfterStep) {
    Rng rng(4);
    ConstrainedProblem p = separable_problem(rng, 6, 3, 0.2);
    const BaselineParams bp = derive_baseline_params(p, 0.8);
    IterateState s = init_state(p, BlockVector(p.x_map.partition(), random_vector(rng, 6)));
    for (int it = 0; it < 20; ++it) {
        cyclic_linearized_admm_step(s, p, bp);
        const VectorXd fresh = apply(p.x_map, s.x) - p.b;
        ASSERT_LE((s.r - fresh).norm(), 1e-9);
    }
}

TEST(ProxJadmm, GammaOneEqualsFullSampleEngine) {
    // separable objective (no f): identical iterates to the randomized
    // engine under full sampling
    Rng rng(5);
    ConstrainedProblem p = separable_problem(rng, 3, 2, 0.5);
    const BaselineParams bp = derive_baseline_params(p, 1.1);
    SolverConfig cfg = full_sample_config(p, bp);
    IterateState a = init_state(p, BlockVector(p.x_map.partition(), random_vector(rng, 3)));
    IterateState b = a;
    Rng srng = make_stream(6, RngStream::Sampling);
    double max_diff = 0.0;
    for (int it = 0; it < 100; ++it) {
        prox_jadmm_step(a, p, bp, 1.0);
        step(b, p, cfg, srng);
        max_diff = std::max(max_diff, (a.x.data() - b.x.data()).cwiseAbs().maxCoeff());
        max_diff = std::max(max_diff, (a.lambda - b.lambda).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(max_diff, 1e-12);
}

TEST(ProxJadmm, GammaZeroFreezesMultiplier) {
    Rng rng(6);
    ConstrainedProblem p = separable_problem(rng, 3, 2, 0.5);
    const BaselineParams bp = derive_baseline_params(p, 1.0);
    IterateState s = init_state(p, BlockVector(p.x_map.partition(), random_vector(rng, 3)));
    for (int it = 0; it < 5; ++it) prox_jadmm_step(s, p, bp, 0.0);
    EXPECT_DOUBLE_EQ(s.lambda.norm(), 0.0);
}

TEST(ProxJadmm, HandComputedDampedStep) {
    // A = (1, 1), b = 2, eta = 4, rho = 1, gamma = 0.5:
    // x = (0.5, 0.5), r = -1, lambda = 0.5
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({1, 1}), 1,
                             {MatrixXd::Identity(1, 1), MatrixXd::Identity(1, 1)});
    p.y_map = BlockLinearMap::empty(1);
    p.b = scalar(2.0);
    p.x_prox = {ProxOracle::zero(), ProxOracle::zero()};
    BaselineParams bp;
    bp.rho = 1.0;
    bp.eta_x = {4.0, 4.0};
    IterateState s = init_state(p);
    prox_jadmm_step(s, p, bp, 0.5);
    EXPECT_DOUBLE_EQ(s.x.data()(0), 0.5);
    EXPECT_DOUBLE_EQ(s.x.data()(1), 0.5);
    EXPECT_DOUBLE_EQ(s.r(0), -1.0);
    EXPECT_DOUBLE_EQ(s.lambda(0), 0.5);
}

TEST(TwoBlockAdmm, EquivalenceOnOrthonormalInstances) {
    // rpdbu with N = M = 1, theta = 1, eta = rho ||A||^2, eta' = rho ||B||^2
    // (P = Q = 0) matches classic 2-block ADMM on orthonormal-column maps
    Rng rng(7);
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({3}), 6, {random_orthonormal(rng, 6, 3)});
    p.y_map = BlockLinearMap(BlockPartition({2}), 6, {random_orthonormal(rng, 6, 2)});
    p.b = random_vector(rng, 6);
    p.x_prox = {ProxOracle::l1(0.5)};
    p.y_prox = {ProxOracle::nonneg()};
    p.validate();

    const double rho = 0.8;
    SolverConfig cfg;
    cfg.regime = Regime::MultiXY;
    cfg.n = cfg.m = 1;
    cfg.rho_x = cfg.rho_y = cfg.rho = rho;
    cfg.eta_x = {rho}; // rho * ||A||^2 with ||A||^2 = 1 exactly
    cfg.eta_y = {rho};

    IterateState a = init_state(p, BlockVector(p.x_map.partition(), random_vector(rng, 3)),
                                BlockVector(p.y_map.partition(), random_vector(rng, 2)));
    IterateState b = a;
    Rng srng = make_stream(8, RngStream::Sampling);
    double max_diff = 0.0;
    for (int it = 0; it < 50; ++it) {
        two_block_admm_step(a, p, rho);
        step(b, p, cfg, srng);
        max_diff = std::max(max_diff, (a.x.data() - b.x.data()).cwiseAbs().maxCoeff());
        max_diff = std::max(max_diff, (a.y.data() - b.y.data()).cwiseAbs().maxCoeff());
        max_diff = std::max(max_diff, (a.lambda - b.lambda).cwiseAbs().maxCoeff());
    }
    EXPECT_LE(max_diff, 1e-10);
}

TEST(Pds, ConfigRealizesTransformedScheme) {
    // hand-rolled reference of the transformed saddle-point updates vs
    // the engine under pds_config, sharing the sampling stream
    Rng rng(9);
    const double a1 = 0.6, a2 = -0.8;
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({1, 1}), 1,
                             {a1 * MatrixXd::Identity(1, 1), a2 * MatrixXd::Identity(1, 1)});
    p.y_map = BlockLinearMap(BlockPartition({1}), 1, {MatrixXd::Identity(1, 1)});
    p.b = VectorXd::Zero(1);
    const double tau_u = 0.3, tau_g = 0.4;
    p.x_prox = {ProxOracle::l1(tau_u), ProxOracle::l1(tau_u)};
    p.y_prox = {ProxOracle::l1(tau_g)};
    p.validate();

    const double q = 0.7, eta = 2.0, tau = 3.0;
    const SolverConfig cfg = [&] {
        SolverConfig c = pds_config(p, q, eta, tau);
        c.seed = 17;
        return c;
    }();
    EXPECT_DOUBLE_EQ(cfg.rho_x, q / eta);
    EXPECT_DOUBLE_EQ(cfg.rho, 1.0 / eta);
    EXPECT_DOUBLE_EQ(cfg.eta_y[0], 1.0 / eta);

    // engine
    const VectorXd x_start = random_vector(rng, 2);
    const VectorXd y_start = random_vector(rng, 1);
    IterateState s = init_state(p, BlockVector(p.x_map.partition(), x_start),
                                BlockVector(p.y_map.partition(), y_start));
    Rng engine_rng = make_stream(cfg.seed, RngStream::Sampling);

    // reference: scalar soft-threshold forms of the transformed updates
    auto soft = [](double v, double t) {
        return v > t ? v - t : (v < -t ? v + t : 0.0);
    };
    double x1 = x_start(0), x2 = x_start(1), y = y_start(0), z = 0.0;
    Rng ref_rng = make_stream(cfg.seed, RngStream::Sampling);

    double max_diff = 0.0;
    for (int it = 0; it < 100; ++it) {
        step(s, p, cfg, engine_rng);

        const int ik = sample_subset(ref_rng, 2, 1).indices[0];
        (void)sample_subset(ref_rng, 1, 1); // engine draws J too (m = M = 1)
        const double r = a1 * x1 + a2 * x2 + y;
        if (ik == 0) {
            const double w = x1 - (-a1 * z + (q / eta) * a1 * r) / tau;
            x1 = soft(w, tau_u / tau);
        } else {
            const double w = x2 - (-a2 * z + (q / eta) * a2 * r) / tau;
            x2 = soft(w, tau_u / tau);
        }
        const double ax = a1 * x1 + a2 * x2;
        y = soft(eta * z - ax, tau_g * eta);
        z = z - (ax + y) / eta;

        max_diff = std::max(max_diff, std::abs(s.x.data()(0) - x1));
        max_diff = std::max(max_diff, std::abs(s.x.data()(1) - x2));
        max_diff = std::max(max_diff, std::abs(s.y.data()(0) - y));
        max_diff = std::max(max_diff, std::abs(s.lambda(0) - z));
    }
    EXPECT_LE(max_diff, 1e-12);
}

TEST(Pds, ShapeChecks) {
    Rng rng(10);
    ConstrainedProblem p = separable_problem(rng, 2, 1, 0.1); // no y side
    EXPECT_THROW(pds_config(p, 0.5, 1.0, 1.0), ParameterError);
}

TEST(Rpcd, ReductionKeepsLambdaZeroAndDescends) {
    // unconstrained (A = 0, b = 0): with n = 1 and eta_i = L_i the
    // randomized engine reduces to proximal coordinate descent; lambda
    // stays 0 and the objective never increases
    Rng rng(11);
    const int nb = 3, bd = 2, n_total = nb * bd;
    MatrixXd h = random_matrix(rng, n_total, n_total);
    MatrixXd q = h * h.transpose();
    q = 0.5 * (q + q.transpose());
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition::uniform(nb, bd), 1,
                             std::vector<MatrixXd>(nb, MatrixXd::Zero(1, bd)));
    p.y_map = BlockLinearMap::empty(1);
    p.b = VectorXd::Zero(1);
    p.f = SmoothOracle::quadratic(q, random_vector(rng, n_total), sym_lambda_max(q));
    p.x_prox.assign(nb, ProxOracle::nonneg());
    p.validate();

    SolverConfig cfg;
    cfg.regime = Regime::NoY;
    cfg.n = 1;
    cfg.rho_x = 1.0;
    cfg.rho = 1.0 / nb;
    for (int i = 0; i < nb; ++i) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q.block(i * bd, i * bd, bd, bd));
        cfg.eta_x.push_back(eig.eigenvalues().maxCoeff()); // exact L_i
    }

    IterateState s = init_state(p, BlockVector(p.x_map.partition(),
                                               random_vector(rng, n_total).cwiseAbs()));
    Rng srng = make_stream(12, RngStream::Sampling);
    double prev = objective(p, s.x, s.y);
    for (int it = 0; it < 1000; ++it) {
        step(s, p, cfg, srng);
        ASSERT_DOUBLE_EQ(s.lambda.norm(), 0.0);
        const double cur = objective(p, s.x, s.y);
        ASSERT_LE(cur, prev + 1e-12) << "iteration " << it;
        prev = cur;
    }
}

TEST(Sbpg, StochasticReductionMatchesHandCodedUpdates) {
    // A = 0: the stochastic engine reduces to stochastic block proximal
    // gradient; mirrored hand-coded updates follow the same streams
    Rng rng(13);
    const int nb = 4;
    MatrixXd h = random_matrix(rng, nb, nb);
    MatrixXd q = h * h.transpose();
    q = 0.5 * (q + q.transpose());
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition::uniform(nb, 1), 1,
                             std::vector<MatrixXd>(nb, MatrixXd::Zero(1, 1)));
    p.y_map = BlockLinearMap::empty(1);
    p.b = VectorXd::Zero(1);
    p.f = SmoothOracle::quadratic(q, random_vector(rng, nb), sym_lambda_max(q));
    p.x_prox.assign(nb, ProxOracle::l1(0.2));
    p.x_feasible = VectorXd::Zero(nb);
    p.validate();

    SolverConfig cfg;
    cfg.regime = Regime::Stochastic;
    cfg.n = 1;
    cfg.rho_x = cfg.rho = 1.0;
    cfg.eta_x.assign(nb, sym_lambda_max(q));
    const StepSchedule sq = StepSchedule::sqrt_k(0.8);
    const double sigma = 0.6;
    const StochasticOracle oracle = StochasticOracle::gaussian(p.f, sigma);

    IterateState s = init_stochastic_state(p, BlockVector(p.x_map.partition()));
    Rng samp = make_stream(14, RngStream::Sampling);
    Rng noise = make_stream(14, RngStream::Noise);

    VectorXd x = VectorXd::Zero(nb);
    Rng ref_samp = make_stream(14, RngStream::Sampling);
    Rng ref_noise = make_stream(14, RngStream::Noise);
    auto soft = [](double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); };
    for (int k = 0; k < 50; ++k) {
        stochastic_step(s, p, cfg, sq, oracle, samp, noise);

        const double alpha = alpha_at(sq, k);
        const int ik = sample_subset(ref_samp, nb, 1).indices[0];
        VectorXd g = q * x + p.f.c();
        const double sd = sigma / std::sqrt(static_cast<double>(nb));
        for (int i = 0; i < nb; ++i) g(i) += sd * ref_noise.normal();
        const double weight = cfg.eta_x[static_cast<std::size_t>(ik)] + 1.0 / alpha;
        x(ik) = soft(x(ik) - g(ik) / weight, 0.2 / weight);

        ASSERT_LT((s.x.data() - x).cwiseAbs().maxCoeff(), 1e-12) << "iteration " << k;
        ASSERT_DOUBLE_EQ(s.lambda.norm(), 0.0);
    }
}
