#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace eflow;
using eflow::test::scalar;
using eflow::test::uniform_mesh;

namespace {

CurveState cubic_on(std::shared_ptr<const Dissection> mesh)
{
    // p(x) = x^3 - 2x^2 + 0.5x + 1
    return interp_hermite(scalar([](double x) { return x * x * x - 2 * x * x + 0.5 * x + 1; },
                                 [](double x) { return 3 * x * x - 4 * x + 0.5; }),
                          mesh);
}

double cubic_derivative(double x, int k)
{
    switch (k) {
    case 0: return x * x * x - 2 * x * x + 0.5 * x + 1;
    case 1: return 3 * x * x - 4 * x + 0.5;
    case 2: return 6 * x - 4;
    default: return 6.0;
    }
}

} // namespace

TEST(DofLayout, Indexing)
{
    const DofLayout l{5, 3};
    EXPECT_EQ(l.size(), 30u);
    EXPECT_EQ(l.index(0, 0, DofKind::value), 0u);
    EXPECT_EQ(l.index(0, 0, DofKind::slope), 1u);
    EXPECT_EQ(l.index(1, 2, DofKind::slope), 11u);
    EXPECT_EQ(l.node_of(11), 1u);
    const auto d = l.element_dofs(1, 1);
    EXPECT_EQ(d, (std::array<std::size_t, 4>{8, 9, 14, 15}));
}

TEST(HermiteShape, PartitionAndNodalConditions)
{
    const double h = 0.37;
    const auto l = hermite_shape(0.0, h, 0), r = hermite_shape(1.0, h, 0);
    const auto dl = hermite_shape(0.0, h, 1), dr = hermite_shape(1.0, h, 1);
    EXPECT_DOUBLE_EQ(l[0], 1.0);
    EXPECT_DOUBLE_EQ(r[2], 1.0);
    EXPECT_DOUBLE_EQ(dl[1], 1.0);
    EXPECT_DOUBLE_EQ(dr[3], 1.0);
    for (int k : {1, 3})
        EXPECT_NEAR(l[k], 0.0, 1e-16);
    EXPECT_NEAR(dl[0], 0.0, 1e-16);
    EXPECT_NEAR(dr[2], 0.0, 1e-16);
    for (double s : {0.1, 0.5, 0.77}) {
        const auto p = hermite_shape(s, h, 0);
        EXPECT_NEAR(p[0] + p[2], 1.0, 1e-15);
    }
    EXPECT_THROW(hermite_shape(0.5, h, 4), std::invalid_argument);
}

TEST(CurveState, CubicOnUnitElement)
{
    auto mesh = uniform_mesh(0.0, 1.0, 1);
    const auto u = interp_hermite(scalar([](double x) { return x * x * x; },
                                         [](double x) { return 3 * x * x; }),
                                  mesh);
    EXPECT_NEAR(eval(u, 0.5, 0)[0], 0.125, 1e-15);
    for (double x : {0.0, 0.3, 1.0})
        EXPECT_NEAR(eval(u, x, 3)[0], 6.0, 1e-12);
}

TEST(CurveState, ReproducesCubicsOnNonuniformMesh)
{
    auto mesh = std::make_shared<const Dissection>(std::vector<double>{-1.0, -0.2, 0.1, 0.9, 2.0});
    const auto u = cubic_on(mesh);
    for (int k = 0; k <= 3; ++k)
        for (double x = -1.0; x <= 2.0; x += 0.0731)
            EXPECT_NEAR(eval(u, x, k)[0], cubic_derivative(x, k), 1e-12) << "k=" << k << " x=" << x;
}

TEST(CurveState, C1AcrossNodes)
{
    auto mesh = uniform_mesh(0.0, 3.0, 6);
    const CurveState u(mesh, 2, test::random_vec(2 * 7 * 2, 42));
    for (std::size_t i = 1; i < 6; ++i)
        for (int k = 0; k <= 1; ++k) {
            const auto left = u.eval_local(i - 1, 1.0, k), right = u.eval_local(i, 0.0, k);
            for (std::size_t j = 0; j < 2; ++j)
                EXPECT_NEAR(left[j], right[j], 1e-13);
        }
}

TEST(CurveState, ConstantHasNoDerivative)
{
    auto mesh = uniform_mesh(0.0, 1.0, 3);
    const auto u = interp_hermite(scalar([](double) { return 2.5; }, [](double) { return 0.0; }), mesh);
    EXPECT_EQ(eval(u, 0.4, 1)[0], 0.0);
    EXPECT_EQ(seminorm_sq(u, 2), 0.0);
}

TEST(CurveState, EvalOutsideIntervalThrows)
{
    auto mesh = uniform_mesh(0.0, 1.0, 3);
    const CurveState u(mesh, 1);
    EXPECT_THROW(eval(u, 1.5, 0), std::out_of_range);
    EXPECT_THROW(CurveState(mesh, 1, Vec(3)), std::invalid_argument);
}

TEST(Seminorm, ClosedForms)
{
    auto mesh = uniform_mesh(0.0, 1.0, 1);
    const auto x2 = interp_hermite(scalar([](double x) { return x * x; }, [](double x) { return 2 * x; }), mesh);
    const auto x3 = interp_hermite(scalar([](double x) { return x * x * x; },
                                          [](double x) { return 3 * x * x; }),
                                   mesh);
    EXPECT_NEAR(seminorm_sq(x2, 2), 4.0, 1e-12);
    EXPECT_NEAR(inner_h2(x2, x3), 6.0, 1e-12);
    EXPECT_NEAR(inner_h2(x3, x3), seminorm_sq(x3, 2), 1e-14);
    EXPECT_NEAR(seminorm_sq(x3, 0), 1.0 / 7.0, 1e-14);
    EXPECT_NEAR(bending_energy(x2), 2.0, 1e-12);
}

TEST(Seminorm, MatchesCompositeSimpsonOracle)
{
    auto mesh = std::make_shared<const Dissection>(std::vector<double>{0.0, 0.3, 0.45, 1.2, 2.0});
    const CurveState u(mesh, 2, test::random_vec(2 * 5 * 2, 7));
    for (int k = 0; k <= 3; ++k) {
        double oracle = 0.0;
        for (std::size_t e = 0; e < mesh->elements(); ++e)
            oracle += test::composite_simpson(
                [&](double x) {
                    const auto v = u.eval_local(e, (x - mesh->node(e)) / mesh->h(e), k);
                    return v[0] * v[0] + v[1] * v[1];
                },
                mesh->node(e), mesh->node(e + 1), 10000);
        EXPECT_NEAR(seminorm_sq(u, k), oracle, 1e-8 * std::max(1.0, oracle)) << "k=" << k;
    }
}

TEST(Seminorm, CircleBendingConvergesToTwoPi)
{
    const double two_pi = 2.0 * std::numbers::pi;
    double prev = 0.0;
    for (std::size_t M : {8u, 16u, 32u}) {
        const auto Z = interp_j3(circle_flow().at(0.0), test::circle_mesh(M));
        const double err = std::abs(seminorm_sq(Z, 2) - two_pi);
        const double h = two_pi / static_cast<double>(M);
        EXPECT_LT(err, std::pow(h, 4));
        if (prev > 0.0) {
            EXPECT_GT(std::log2(prev / err), 3.5);
        }
        prev = err;
    }
}

TEST(Snapshot, CsvLayout)
{
    auto mesh = uniform_mesh(0.0, 1.0, 2);
    const CurveState u(mesh, 2);
    std::ostringstream os;
    write_snapshot_csv(os, u, 4);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "x,z1,z2");
    std::size_t rows = 0;
    while (std::getline(is, line))
        ++rows;
    EXPECT_EQ(rows, 9u);
}
