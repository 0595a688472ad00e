#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace blocksolve;
using bstest::random_matrix;
using bstest::random_vector;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::path(testing::TempDir()) / name).string();
}

} // namespace

TEST(GenNcqp, PsdAndPartition) {
    const ConstrainedProblem p = gen_ncqp(20, 100, 20, 0, 42);
    EXPECT_EQ(p.num_x_blocks(), 20);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(p.x_map.partition().dim(i), 5);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(p.f.q());
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
    EXPECT_NEAR(p.f.lipschitz(), eig.eigenvalues().maxCoeff(),
                1e-6 * eig.eigenvalues().maxCoeff());
}

TEST(GenNcqp, RankDeficitMakesQSingular) {
    const ConstrainedProblem p = gen_ncqp(5, 30, 6, 4, 7);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(p.f.q());
    EXPECT_LE(eig.eigenvalues().minCoeff(), 1e-6);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
}

TEST(GenNcqp, DeterministicForFixedSeed) {
    const ConstrainedProblem a = gen_ncqp(6, 24, 4, 2, 99);
    const ConstrainedProblem b = gen_ncqp(6, 24, 4, 2, 99);
    EXPECT_EQ(problem_to_json(a), problem_to_json(b));
}

TEST(GenNcqp, FeasiblePointMatchesB) {
    const ConstrainedProblem p = gen_ncqp(4, 12, 3, 0, 11);
    ASSERT_TRUE(p.x_feasible.has_value());
    EXPECT_GE(p.x_feasible->minCoeff(), 0.0);
    const BlockVector x(p.x_map.partition(), *p.x_feasible);
    EXPECT_DOUBLE_EQ(feas_violation(p, x), 0.0);
}

TEST(GenNcqp, DivisibilityEnforced) {
    EXPECT_THROW(gen_ncqp(5, 10, 3, 0, 1), ParameterError);
    EXPECT_THROW(gen_ncqp(5, 10, 2, 10, 1), ParameterError);
}

TEST(GenClasso, ReformulationAlgebra) {
    // any x with C x <= d maps to (x, y = d - C x) feasible with y >= 0
    Rng rng(13);
    const MatrixXd a = random_matrix(rng, 8, 6);
    const VectorXd b_obs = random_vector(rng, 8);
    const MatrixXd c = random_matrix(rng, 3, 6);
    const VectorXd x0 = random_vector(rng, 6);
    const VectorXd d = c * x0 + random_vector(rng, 3).cwiseAbs(); // C x0 <= d
    const ConstrainedProblem p = gen_classo(a, b_obs, c, d, 0.8, 3);

    const BlockVector x(p.x_map.partition(), x0);
    const VectorXd y_slack = d - c * x0;
    EXPECT_GE(y_slack.minCoeff(), 0.0);
    const BlockVector y(p.y_map.partition(), y_slack);
    EXPECT_LT(feas_violation(p, x, y), 1e-12);
    EXPECT_TRUE(p.y_prox[0].is_member(y_slack));
}

TEST(GenClasso, TauZeroReducesToLeastSquares) {
    Rng rng(17);
    const MatrixXd a = random_matrix(rng, 5, 4);
    const VectorXd b_obs = random_vector(rng, 5);
    const MatrixXd c = random_matrix(rng, 2, 4);
    const VectorXd d = VectorXd::Ones(2);
    const ConstrainedProblem p = gen_classo(a, b_obs, c, d, 0.0, 2);
    const VectorXd x0 = random_vector(rng, 4);
    const BlockVector x(p.x_map.partition(), x0);
    const BlockVector y(p.y_map.partition(), VectorXd::Ones(2));
    EXPECT_NEAR(objective(p, x, y), 0.5 * (a * x0 - b_obs).squaredNorm(), 1e-10);
}

TEST(GenClasso, ScalarResidual) {
    // 1-D: C = 1, d = 2, x = 1 -> y = 1, constraint residual 0
    const MatrixXd a = MatrixXd::Identity(1, 1);
    const VectorXd b_obs = VectorXd::Zero(1);
    const MatrixXd c = MatrixXd::Identity(1, 1);
    VectorXd d(1);
    d << 2;
    const ConstrainedProblem p = gen_classo(a, b_obs, c, d, 1.0, 1);
    BlockVector x(p.x_map.partition());
    x.data() << 1;
    BlockVector y(p.y_map.partition());
    y.data() << 1;
    EXPECT_DOUBLE_EQ(feas_violation(p, x, y), 0.0);
}

TEST(GenClasso, DimensionMismatchRejected) {
    Rng rng(19);
    const MatrixXd a = random_matrix(rng, 5, 4);
    const MatrixXd c = random_matrix(rng, 2, 3); // wrong column count
    EXPECT_THROW(gen_classo(a, random_vector(rng, 5), c, random_vector(rng, 2), 1.0, 2),
                 DimensionError);
}

TEST(ProblemIo, RoundTripBitExact) {
    const ConstrainedProblem p = gen_ncqp(6, 24, 4, 2, 77);
    const std::string path = temp_file("roundtrip_ncqp.json");
    save_problem(p, path);
    const ConstrainedProblem q = load_problem(path);
    EXPECT_TRUE(p.x_map == q.x_map);
    EXPECT_TRUE(p.y_map == q.y_map);
    EXPECT_TRUE(p.b == q.b);
    EXPECT_TRUE(p.f.q() == q.f.q());
    EXPECT_TRUE(p.f.c() == q.f.c());
    EXPECT_EQ(p.f.lipschitz(), q.f.lipschitz());
    ASSERT_TRUE(q.x_feasible.has_value());
    EXPECT_TRUE(*p.x_feasible == *q.x_feasible);
    // serialize-again identity implies a bit-exact round trip
    EXPECT_EQ(problem_to_json(p), problem_to_json(q));
}

TEST(ProblemIo, RoundTripClassoWithYSide) {
    Rng rng(21);
    const ConstrainedProblem p = gen_classo_random(6, 8, 3, 0.5, 4, 3);
    const std::string path = temp_file("roundtrip_classo.json");
    save_problem(p, path);
    const ConstrainedProblem q = load_problem(path);
    EXPECT_EQ(problem_to_json(p), problem_to_json(q));
    EXPECT_EQ(q.num_y_blocks(), 1);
    EXPECT_EQ(q.y_prox[0].kind(), ProxKind::Nonneg);
    EXPECT_EQ(q.x_prox[0].kind(), ProxKind::L1);
    EXPECT_DOUBLE_EQ(q.x_prox[0].tau(), 0.5);
    EXPECT_DOUBLE_EQ(q.f.c0(), p.f.c0());
}

TEST(ProblemIo, MissingFieldNamesField) {
    const ConstrainedProblem p = gen_ncqp(3, 6, 2, 0, 1);
    nlohmann::json j = nlohmann::json::parse(problem_to_json(p));
    j.erase("b");
    try {
        problem_from_json(j.dump());
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
    }
}

TEST(ProblemIo, CustomOracleRejectedBothWays) {
    ConstrainedProblem p = gen_ncqp(3, 6, 2, 0, 1);
    p.x_prox[0] = ProxOracle::custom([](const VectorXd& v, double) { return v; },
                                     [](const VectorXd&) { return 0.0; });
    try {
        problem_to_json(p);
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("custom oracles not serializable"),
                  std::string::npos);
    }

    const ConstrainedProblem q = gen_ncqp(3, 6, 2, 0, 1);
    nlohmann::json j = nlohmann::json::parse(problem_to_json(q));
    j["xProx"][0]["kind"] = "custom";
    try {
        problem_from_json(j.dump());
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("custom oracles not serializable"),
                  std::string::npos);
    }
}

TEST(ProblemIo, ParseErrorHasContext) {
    EXPECT_THROW(problem_from_json("{not json"), IoError);
}

TEST(ProblemIo, SeventeenSignificantDigits) {
    ConstrainedProblem p;
    p.x_map = BlockLinearMap(BlockPartition({1}), 1, {MatrixXd::Identity(1, 1)});
    p.y_map = BlockLinearMap::empty(1);
    VectorXd b(1);
    b << 0.1; // 0.1 is not exactly representable; 17 digits round-trip it
    p.b = b;
    p.x_prox = {ProxOracle::zero()};
    const std::string text = problem_to_json(p);
    EXPECT_NE(text.find("0.10000000000000001"), std::string::npos) << text;
    EXPECT_EQ(problem_from_json(text).b(0), 0.1);
}
