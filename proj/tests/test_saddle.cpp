#include <gtest/gtest.h>

#include "support.hpp"

using namespace eflow;
constexpr double pi = std::numbers::pi;

namespace {

SaddleSystem flow_system(const AnalyticFlow& flow, std::size_t M, double tau, ConstraintMode mode,
                         const BoundarySpec& bc)
{
    FlowConfig cfg;
    cfg.initial = flow;
    cfg.mesh = test::uniform_mesh(flow.a, flow.b, M);
    cfg.tau = tau;
    cfg.T = tau;
    cfg.mode = mode;
    cfg.bc = bc;
    const Stepper stepper(cfg);
    return stepper.build_system(init_state(cfg), 0);
}

/// Dense LU of the full block matrix.
std::pair<Eigen::VectorXd, Eigen::VectorXd> dense_solve(const SaddleSystem& sys)
{
    const Eigen::MatrixXd A = test::dense(sys.A), B = test::dense(sys.B);
    const auto np = A.rows(), nc = B.rows();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(np + nc, np + nc);
    K.topLeftCorner(np, np) = A;
    K.topRightCorner(np, nc) = B.transpose();
    K.bottomLeftCorner(nc, np) = B;
    Eigen::VectorXd rhs(np + nc);
    for (Eigen::Index i = 0; i < np; ++i)
        rhs(i) = sys.rhs_primal[i];
    for (Eigen::Index k = 0; k < nc; ++k)
        rhs(np + k) = sys.B.rows[k].rhs;
    const Eigen::VectorXd x = K.fullPivLu().solve(rhs);
    return {x.head(np), x.tail(nc)};
}

void expect_matches_dense(const SaddleSystem& sys, double tol)
{
    const auto sol = solve_kkt(sys);
    const auto [x, l] = dense_solve(sys);
    const double xs = std::max(1.0, x.cwiseAbs().maxCoeff()), ls = std::max(1.0, l.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        ASSERT_NEAR(sol.primal[i], x(i), tol * xs) << "primal " << i;
    for (Eigen::Index k = 0; k < l.size(); ++k)
        ASSERT_NEAR(sol.multipliers[k], l(k), tol * ls) << sys.B.rows[k].label();
}

} // namespace

TEST(SolveKkt, EmptyConstraintsIsSpdSolve)
{
    auto sys = flow_system(circle_flow(), 6, 0.1, ConstraintMode::P2, BoundarySpec::semi_clamped());
    sys.B.rows.clear();
    sys.rhs_primal = test::random_vec(sys.A.size(), 5);
    const auto sol = solve_kkt(sys);
    const Eigen::MatrixXd A = test::dense(sys.A);
    const Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(sys.rhs_primal.data(), sys.rhs_primal.size());
    const Eigen::VectorXd x = A.llt().solve(f);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        EXPECT_NEAR(sol.primal[i], x(i), 1e-10 * x.cwiseAbs().maxCoeff());
    EXPECT_TRUE(sol.multipliers.empty());
}

TEST(SolveKkt, ZeroDataGivesZero)
{
    auto sys = flow_system(helix_flow(), 5, 0.1, ConstraintMode::P2, BoundarySpec::clamped());
    std::fill(sys.rhs_primal.begin(), sys.rhs_primal.end(), 0.0);
    for (auto& r : sys.B.rows)
        r.rhs = 0.0;
    const auto sol = solve_kkt(sys);
    for (double v : sol.primal)
        EXPECT_EQ(v, 0.0);
    for (double v : sol.multipliers)
        EXPECT_EQ(v, 0.0);
}

TEST(SolveKkt, MatchesDenseOracleSmallCircle)
{
    const auto sys = flow_system(circle_flow(), 2, 0.1, ConstraintMode::P2, BoundarySpec::semi_clamped());
    expect_matches_dense(sys, 1e-10);
}

TEST(SolveKkt, MatchesDenseOracleWithRandomData)
{
    // non-trivial right-hand sides on both blocks, sizes up to ~500 unknowns
    struct Case { AnalyticFlow flow; std::size_t M; ConstraintMode mode; BoundarySpec bc; };
    const std::vector<Case> cases{
        {circle_flow(), 3, ConstraintMode::P1, BoundarySpec::semi_clamped()},
        {circle_flow(), 17, ConstraintMode::P2, BoundarySpec::semi_clamped()},
        {circle_flow(), 10, ConstraintMode::P2, BoundarySpec::periodic_ends()},
        {helix_flow(), 8, ConstraintMode::P1, BoundarySpec::clamped()},
        {helix_flow(), 40, ConstraintMode::P2, BoundarySpec::clamped()},
        {helix_flow(), 60, ConstraintMode::P2, BoundarySpec::clamped()},
    };
    unsigned seed = 100;
    for (const auto& c : cases) {
        auto sys = flow_system(c.flow, c.M, 0.05, c.mode, c.bc);
        ASSERT_LE(sys.A.size() + sys.B.size(), 500u);
        sys.rhs_primal = test::random_vec(sys.A.size(), ++seed);
        const auto q = test::random_vec(sys.B.size(), ++seed);
        for (std::size_t k = 0; k < sys.B.size(); ++k)
            sys.B.rows[k].rhs = q[k];
        SCOPED_TRACE("M=" + std::to_string(c.M));
        expect_matches_dense(sys, 1e-10);
    }
}

TEST(SolveKkt, ResidualCertificate)
{
    const auto sys = flow_system(helix_flow(), 16, 0.1, ConstraintMode::P2, BoundarySpec::clamped());
    const auto sol = solve_kkt(sys);
    double rhs = 0.0;
    for (double v : sys.rhs_primal)
        rhs = std::max(rhs, std::abs(v));
    EXPECT_LE(sol.residual, 1e-9 * (1.0 + rhs));
    const auto Bx = sys.B.apply(sol.primal);
    for (std::size_t k = 0; k < Bx.size(); ++k)
        EXPECT_NEAR(Bx[k], sys.B.rows[k].rhs, 1e-9);
}

TEST(SolveKkt, RankDeficientRowsAreNamed)
{
    auto sys = flow_system(circle_flow(), 4, 0.1, ConstraintMode::P2, BoundarySpec::semi_clamped());
    ConstraintRow twice = sys.B.rows[3];
    for (auto& [c, v] : twice.entries)
        v *= 2.0;
    sys.B.rows.push_back(twice);
    try {
        solve_kkt(sys);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_FALSE(e.rows().empty());
        EXPECT_NE(std::string(e.what()).find("arc_length"), std::string::npos) << e.what();
    }
}

TEST(SolveKkt, SingleElementClampedIsOverdetermined)
{
    // all four endpoint dofs fixed: the midpoint row is a combination of boundary rows
    const auto sys = flow_system(helix_flow(), 1, 0.1, ConstraintMode::P2, BoundarySpec::clamped());
    EXPECT_THROW(solve_kkt(sys), SolverError);
}

TEST(SolveKkt, ZeroRowsAreReportedNotFactorized)
{
    auto sys = flow_system(circle_flow(), 4, 0.1, ConstraintMode::P2, BoundarySpec::semi_clamped());
    ConstraintRow zero = sys.B.rows[2];
    for (auto& [c, v] : zero.entries)
        v = 0.0;
    sys.B.rows.push_back(zero);
    const auto sol = solve_kkt(sys);
    ASSERT_EQ(sol.dropped_rows.size(), 1u);
    EXPECT_EQ(sol.multipliers.back(), 0.0);
}

TEST(SolveKkt, RejectsInconsistentShapes)
{
    auto sys = flow_system(circle_flow(), 4, 0.1, ConstraintMode::P1, BoundarySpec::semi_clamped());
    sys.rhs_primal.pop_back();
    EXPECT_THROW(solve_kkt(sys), std::invalid_argument);
}
