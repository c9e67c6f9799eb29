#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "eflow/eflow.hpp"

namespace eflow::test {

inline std::shared_ptr<const Dissection> uniform_mesh(double a, double b, std::size_t M)
{
    return std::make_shared<const Dissection>(Dissection::uniform(a, b, M));
}

inline std::shared_ptr<const Dissection> circle_mesh(std::size_t M)
{
    return uniform_mesh(0.0, 2.0 * std::numbers::pi, M);
}

inline SampledFunction scalar(std::function<double(double)> f, std::function<double(double)> df)
{
    return {1, [f](double x) { return Vec{f(x)}; }, [df](double x) { return Vec{df(x)}; }};
}

inline Vec random_vec(std::size_t n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(n);
    for (double& x : v)
        x = u(rng);
    return v;
}

inline Eigen::MatrixXd dense(const SymBandMatrix& A)
{
    Eigen::MatrixXd D(A.size(), A.size());
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < A.size(); ++j)
            D(i, j) = A(i, j);
    return D;
}

inline Eigen::MatrixXd dense(const ConstraintMatrix& B)
{
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(B.size(), B.cols);
    for (std::size_t r = 0; r < B.size(); ++r)
        for (const auto& [c, v] : B.rows[r].entries)
            D(r, c) = v;
    return D;
}

/// Composite Simpson on n panels of f over [a, b].
inline double composite_simpson(const std::function<double(double)>& f, double a, double b, std::size_t n)
{
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < n; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return s * h / 3.0;
}

} // namespace eflow::test
