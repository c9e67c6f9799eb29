#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace eflow {

struct QuadraturePoint {
    double s;      // position on the reference element [0, 1]
    double weight; // weights sum to 1
};

namespace detail {

inline constexpr std::array<QuadraturePoint, 1> gauss1{{{0.5, 1.0}}};

// sqrt(1/3)/2
inline constexpr double g2 = 0.28867513459481288225;
inline constexpr std::array<QuadraturePoint, 2> gauss2{{{0.5 - g2, 0.5}, {0.5 + g2, 0.5}}};

// sqrt(3/5)/2
inline constexpr double g3 = 0.38729833462074168852;
inline constexpr std::array<QuadraturePoint, 3> gauss3{
    {{0.5 - g3, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + g3, 5.0 / 18.0}}};

inline constexpr double g4a = 0.16999052179242813331; // 0.339981043584856/2
inline constexpr double g4b = 0.43056815579702628761; // 0.861136311594053/2
inline constexpr double w4a = 0.32607257743127307400; // 0.652145154862546/2
inline constexpr double w4b = 0.17392742256872692600; // 0.347854845137454/2
inline constexpr std::array<QuadraturePoint, 4> gauss4{
    {{0.5 - g4b, w4b}, {0.5 - g4a, w4a}, {0.5 + g4a, w4a}, {0.5 + g4b, w4b}}};

} // namespace detail

/// Gauss-Legendre rule on [0, 1] with n points, exact for degree 2n-1.
inline std::span<const QuadraturePoint> gauss_rule(std::size_t n)
{
    switch (n) {
    case 1: return detail::gauss1;
    case 2: return detail::gauss2;
    case 3: return detail::gauss3;
    case 4: return detail::gauss4;
    default: throw std::invalid_argument("gauss_rule: supported point counts are 1..4");
    }
}

/// Adaptive Gauss-Kronrod integral of f over [a, b].
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double abs_tol = 1e-12)
{
    if (a == b)
        return 0.0;
    double err = 0.0;
    const double len = std::abs(b - a);
    // gauss_kronrod takes a relative tolerance; convert against the interval length
    const double rel = std::max(abs_tol / std::max(len, 1.0), 1e-15);
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 20, rel, &err);
}

} // namespace eflow
