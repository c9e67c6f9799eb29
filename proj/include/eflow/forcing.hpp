#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "eflow/hermite.hpp"
#include "eflow/interpolate.hpp"
#include "eflow/quadrature.hpp"

namespace eflow {

/// A curve evolution z(x, t) with hand-coded derivatives. Stationary curves are flows
/// with z_t = 0.
struct AnalyticFlow {
    using Field = std::function<Vec(double x, double t)>;

    std::string name;
    std::size_t dim = 0;
    double a = 0.0;
    double b = 1.0;
    bool stationary = false;

    Field z, z_x, z_xx, z_xxx, z_xxxx;
    Field z_t, z_tx;

    /// Optional closed form of int_x^b z_t(s, t) ds; quadrature is used when empty.
    Field tail;
    /// Optional closed form of |z(t)|_{H^2}^2 over [a, b].
    std::function<double(double t)> h2_seminorm_sq;

    SampledFunction at(double t) const
    {
        return {dim, [this, t](double x) { return z(x, t); },
                [this, t](double x) { return z_x(x, t); }};
    }
    SampledFunction velocity_at(double t) const
    {
        return {dim, [this, t](double x) { return z_t(x, t); },
                [this, t](double x) { return z_tx(x, t); }};
    }
};

namespace detail {

inline double dot(const Vec& u, const Vec& v)
{
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        s += u[j] * v[j];
    return s;
}

} // namespace detail

/// Samples |z_x|^2 on a deterministic grid of (x, t) and throws if it deviates from 1.
inline void validate_flow(const AnalyticFlow& flow, double t_max = 1.0, double tol = 1e-10)
{
    if (flow.dim == 0 || !(flow.b > flow.a))
        throw std::invalid_argument("AnalyticFlow '" + flow.name + "': bad dimension or interval");
    if (!flow.z || !flow.z_x || !flow.z_xx || !flow.z_xxx || !flow.z_xxxx || !flow.z_t || !flow.z_tx)
        throw std::invalid_argument("AnalyticFlow '" + flow.name + "': missing derivative callables");
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> ux(flow.a, flow.b), ut(0.0, t_max);
    for (int k = 0; k < 64; ++k) {
        const double x = ux(rng), t = flow.stationary ? 0.0 : ut(rng);
        const Vec zx = flow.z_x(x, t);
        const double dev = std::abs(detail::dot(zx, zx) - 1.0);
        if (dev > tol)
            throw std::invalid_argument("AnalyticFlow '" + flow.name +
                                        "' violates |z_x| = 1 at x = " + std::to_string(x) +
                                        ", t = " + std::to_string(t));
    }
}

// ---------------------------------------------------------------------------
// Built-in flows

/// Unit circle (cos x, sin x) on [0, 2 pi]; stationary under semi-clamped conditions.
inline AnalyticFlow circle_flow()
{
    AnalyticFlow f;
    f.name = "circle";
    f.dim = 2;
    f.a = 0.0;
    f.b = 2.0 * std::numbers::pi;
    f.stationary = true;
    f.z = [](double x, double) { return Vec{std::cos(x), std::sin(x)}; };
    f.z_x = [](double x, double) { return Vec{-std::sin(x), std::cos(x)}; };
    f.z_xx = [](double x, double) { return Vec{-std::cos(x), -std::sin(x)}; };
    f.z_xxx = [](double x, double) { return Vec{std::sin(x), -std::cos(x)}; };
    f.z_xxxx = [](double x, double) { return Vec{std::cos(x), std::sin(x)}; };
    f.z_t = [](double, double) { return Vec{0.0, 0.0}; };
    f.z_tx = f.z_t;
    f.tail = f.z_t;
    f.h2_seminorm_sq = [](double) { return 2.0 * std::numbers::pi; };
    return f;
}

/// Helix (cos(l x), sin(l x), m x) with l = pi/sqrt(pi^2+1), m = 1/sqrt(pi^2+1) on
/// [0, 2 sqrt(pi^2+1)]; stationary under clamped conditions.
inline AnalyticFlow helix_flow()
{
    constexpr double pi = std::numbers::pi;
    const double s = std::sqrt(pi * pi + 1.0);
    const double l = pi / s, m = 1.0 / s;
    AnalyticFlow f;
    f.name = "helix";
    f.dim = 3;
    f.a = 0.0;
    f.b = 2.0 * s;
    f.stationary = true;
    f.z = [=](double x, double) { return Vec{std::cos(l * x), std::sin(l * x), m * x}; };
    f.z_x = [=](double x, double) { return Vec{-l * std::sin(l * x), l * std::cos(l * x), m}; };
    f.z_xx = [=](double x, double) {
        return Vec{-l * l * std::cos(l * x), -l * l * std::sin(l * x), 0.0};
    };
    f.z_xxx = [=](double x, double) {
        return Vec{l * l * l * std::sin(l * x), -l * l * l * std::cos(l * x), 0.0};
    };
    f.z_xxxx = [=](double x, double) {
        const double l4 = l * l * l * l;
        return Vec{l4 * std::cos(l * x), l4 * std::sin(l * x), 0.0};
    };
    f.z_t = [](double, double) { return Vec{0.0, 0.0, 0.0}; };
    f.z_tx = f.z_t;
    f.tail = f.z_t;
    // |z_xx|^2 = l^4 is constant along the curve
    const double len = f.b - f.a;
    f.h2_seminorm_sq = [=](double) { return l * l * l * l * len; };
    return f;
}

/// (r(t) cos x, r(t) sin x, t x / 2 pi) with r(t) = sqrt(1 - t^2 / 4 pi^2) on [0, 2 pi]:
/// a circle at t = 0 unwinding into a helix.
inline AnalyticFlow forced_helix_flow()
{
    constexpr double pi = std::numbers::pi;
    constexpr double two_pi = 2.0 * pi;
    auto r = [](double t) { return std::sqrt(1.0 - t * t / (4.0 * pi * pi)); };
    auto dr = [r](double t) { return -t / (4.0 * pi * pi * r(t)); };
    AnalyticFlow f;
    f.name = "forced_helix";
    f.dim = 3;
    f.a = 0.0;
    f.b = two_pi;
    f.stationary = false;
    f.z = [=](double x, double t) {
        return Vec{r(t) * std::cos(x), r(t) * std::sin(x), t * x / two_pi};
    };
    f.z_x = [=](double x, double t) {
        return Vec{-r(t) * std::sin(x), r(t) * std::cos(x), t / two_pi};
    };
    f.z_xx = [=](double x, double t) { return Vec{-r(t) * std::cos(x), -r(t) * std::sin(x), 0.0}; };
    f.z_xxx = [=](double x, double t) { return Vec{r(t) * std::sin(x), -r(t) * std::cos(x), 0.0}; };
    f.z_xxxx = [=](double x, double t) { return Vec{r(t) * std::cos(x), r(t) * std::sin(x), 0.0}; };
    f.z_t = [=](double x, double t) {
        return Vec{dr(t) * std::cos(x), dr(t) * std::sin(x), x / two_pi};
    };
    f.z_tx = [=](double x, double t) { return Vec{-dr(t) * std::sin(x), dr(t) * std::cos(x), 1.0 / two_pi}; };
    const double b = f.b;
    f.tail = [=](double x, double t) {
        return Vec{dr(t) * (std::sin(b) - std::sin(x)), dr(t) * (std::cos(x) - std::cos(b)),
                   (b * b - x * x) / (2.0 * two_pi)};
    };
    f.h2_seminorm_sq = [=](double t) { const double rt = r(t); return rt * rt * two_pi; };
    return f;
}

struct FlowEntry {
    std::string description;
    std::function<AnalyticFlow()> make;
    bool forced = false;
};

/// Named flows selectable from configuration files.
inline const std::map<std::string, FlowEntry>& flow_registry()
{
    static const std::map<std::string, FlowEntry> registry{
        {"circle", {"unit circle in R^2 on [0, 2pi], stationary (semi-clamped)", circle_flow, false}},
        {"helix", {"helix in R^3 on [0, 2 sqrt(pi^2+1)], stationary (clamped)", helix_flow, false}},
        {"forced_helix",
         {"circle unwinding into a helix in R^3 on [0, 2pi], manufactured forcing", forced_helix_flow,
          true}},
    };
    return registry;
}

inline AnalyticFlow make_flow(const std::string& name)
{
    const auto& reg = flow_registry();
    const auto it = reg.find(name);
    if (it == reg.end())
        throw std::invalid_argument("unknown flow '" + name + "'");
    AnalyticFlow f = it->second.make();
    validate_flow(f);
    return f;
}

// ---------------------------------------------------------------------------
// Multiplier and forcing terms

/// x -> lambda(x, t) = -z_x . int_x^b z_t - |z_xx|^2 with its first two x-derivatives.
struct MultiplierField {
    std::function<double(double)> value;
    std::function<double(double)> dx;
    std::function<double(double)> dxx;
};

inline Vec tail_integral(const AnalyticFlow& flow, double x, double t)
{
    if (flow.tail)
        return flow.tail(x, t);
    Vec out(flow.dim);
    for (std::size_t j = 0; j < flow.dim; ++j)
        out[j] = integrate_adaptive([&](double s) { return flow.z_t(s, t)[j]; }, x, flow.b, 1e-12);
    return out;
}

inline MultiplierField lambda_field(const AnalyticFlow& flow, double t)
{
    using detail::dot;
    // With T(x) = int_x^b z_t: T' = -z_t, T'' = -z_tx.
    MultiplierField m;
    m.value = [&flow, t](double x) {
        const Vec T = tail_integral(flow, x, t);
        const Vec zxx = flow.z_xx(x, t);
        return -dot(T, flow.z_x(x, t)) - dot(zxx, zxx);
    };
    m.dx = [&flow, t](double x) {
        const Vec T = tail_integral(flow, x, t);
        const Vec zxx = flow.z_xx(x, t);
        return dot(flow.z_t(x, t), flow.z_x(x, t)) - dot(T, zxx) - 2.0 * dot(zxx, flow.z_xxx(x, t));
    };
    m.dxx = [&flow, t](double x) {
        const Vec T = tail_integral(flow, x, t);
        const Vec zx = flow.z_x(x, t), zxx = flow.z_xx(x, t), zxxx = flow.z_xxx(x, t);
        const Vec zt = flow.z_t(x, t);
        return dot(flow.z_tx(x, t), zx) + 2.0 * dot(zt, zxx) - dot(T, zxxx) - 2.0 * dot(zxxx, zxxx) -
               2.0 * dot(zxx, flow.z_xxxx(x, t));
    };
    return m;
}

/// (lambda z_x)_x and its x-derivative at time t.
inline SampledFunction multiplier_force(const AnalyticFlow& flow, double t)
{
    auto lam = std::make_shared<MultiplierField>(lambda_field(flow, t));
    SampledFunction g;
    g.dim = flow.dim;
    g.value = [&flow, t, lam](double x) {
        const double l = lam->value(x), lx = lam->dx(x);
        const Vec zx = flow.z_x(x, t), zxx = flow.z_xx(x, t);
        Vec out(flow.dim);
        for (std::size_t j = 0; j < flow.dim; ++j)
            out[j] = lx * zx[j] + l * zxx[j];
        return out;
    };
    g.derivative = [&flow, t, lam](double x) {
        const double l = lam->value(x), lx = lam->dx(x), lxx = lam->dxx(x);
        const Vec zx = flow.z_x(x, t), zxx = flow.z_xx(x, t), zxxx = flow.z_xxx(x, t);
        Vec out(flow.dim);
        for (std::size_t j = 0; j < flow.dim; ++j)
            out[j] = lxx * zx[j] + 2.0 * lx * zxx[j] + l * zxxx[j];
        return out;
    };
    return g;
}

struct ForcedTerms {
    CurveState U; // I_{h,3} z(t)
    CurveState V; // I_{h,3} z_t(t)
    CurveState W; // I_{h,3} (lambda z_x)_x (t)
};

inline ForcedTerms forced_terms(const AnalyticFlow& flow, std::shared_ptr<const Dissection> mesh,
                                double t)
{
    return {interp_hermite(flow.at(t), mesh), interp_hermite(flow.velocity_at(t), mesh),
            interp_hermite(multiplier_force(flow, t), mesh)};
}

} // namespace eflow
