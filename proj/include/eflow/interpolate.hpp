#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "eflow/hermite.hpp"
#include "eflow/mesh.hpp"

namespace eflow {

/// A d-valued function on [a, b] and, where an operator needs it, its derivative.
struct SampledFunction {
    std::size_t dim = 1;
    std::function<Vec(double)> value;
    std::function<Vec(double)> derivative;
};

/// Continuous piecewise quadratic given by its values on N_2 (node, midpoint, node, ...).
class QuadraticPP {
public:
    QuadraticPP(std::shared_ptr<const Dissection> mesh, std::size_t dim, std::vector<Vec> samples)
        : mesh_(std::move(mesh)), dim_(dim), samples_(std::move(samples))
    {
        if (samples_.size() != 2 * mesh_->elements() + 1)
            throw std::invalid_argument("QuadraticPP: need one sample per point of N_2");
    }

    const Dissection& mesh() const noexcept { return *mesh_; }
    std::size_t dim() const noexcept { return dim_; }
    const std::vector<Vec>& samples() const noexcept { return samples_; }

    Vec operator()(double x) const
    {
        const std::size_t e = mesh_->locate(x);
        const double s = (x - mesh_->node(e)) / mesh_->h(e);
        // Lagrange basis on {0, 1/2, 1}
        const double l0 = 2.0 * (s - 0.5) * (s - 1.0);
        const double l1 = -4.0 * s * (s - 1.0);
        const double l2 = 2.0 * s * (s - 0.5);
        const Vec& f0 = samples_[2 * e];
        const Vec& f1 = samples_[2 * e + 1];
        const Vec& f2 = samples_[2 * e + 2];
        Vec out(dim_);
        for (std::size_t j = 0; j < dim_; ++j)
            out[j] = l0 * f0[j] + l1 * f1[j] + l2 * f2[j];
        return out;
    }

private:
    std::shared_ptr<const Dissection> mesh_;
    std::size_t dim_;
    std::vector<Vec> samples_;
};

/// Nodal P2 interpolant: matches f on N_2.
inline QuadraticPP interp_p2(const SampledFunction& f, std::shared_ptr<const Dissection> mesh)
{
    std::vector<Vec> samples;
    for (double x : mesh->nodes_p2())
        samples.push_back(f.value(x));
    return QuadraticPP(std::move(mesh), f.dim, std::move(samples));
}

/// Cubic C^1 interpolant: nodal values and slopes of f.
inline CurveState interp_hermite(const SampledFunction& f, std::shared_ptr<const Dissection> mesh)
{
    if (!f.derivative)
        throw std::invalid_argument("interp_hermite: derivative callable required");
    CurveState u(mesh, f.dim);
    for (std::size_t i = 0; i < mesh->node_count(); ++i) {
        const Vec v = f.value(mesh->node(i));
        const Vec d = f.derivative(mesh->node(i));
        for (std::size_t j = 0; j < f.dim; ++j) {
            u.set(i, j, DofKind::value, v[j]);
            u.set(i, j, DofKind::slope, d[j]);
        }
    }
    return u;
}

/// v(a) + int_a^x I_{h,2} v' : slopes copy f' at the nodes, values are accumulated
/// element by element with Simpson's rule on f'. The derivative of the result is the
/// P2 interpolant of f', so it matches f' at the midpoints as well.
inline CurveState interp_j3(const SampledFunction& f, std::shared_ptr<const Dissection> mesh)
{
    if (!f.derivative)
        throw std::invalid_argument("interp_j3: derivative callable required");
    CurveState u(mesh, f.dim);
    Vec acc = f.value(mesh->a());
    Vec left = f.derivative(mesh->a());
    for (std::size_t j = 0; j < f.dim; ++j) {
        u.set(0, j, DofKind::value, acc[j]);
        u.set(0, j, DofKind::slope, left[j]);
    }
    for (std::size_t e = 0; e < mesh->elements(); ++e) {
        const Vec mid = f.derivative(mesh->midpoint(e));
        const Vec right = f.derivative(mesh->node(e + 1));
        const double w = mesh->h(e) / 6.0;
        for (std::size_t j = 0; j < f.dim; ++j) {
            acc[j] += w * (left[j] + 4.0 * mid[j] + right[j]);
            u.set(e + 1, j, DofKind::value, acc[j]);
            u.set(e + 1, j, DofKind::slope, right[j]);
        }
        left = right;
    }
    return u;
}

/// Composite Simpson rule, i.e. the exact integral of interp_p2(f).
inline Vec simpson(const SampledFunction& f, const Dissection& mesh)
{
    Vec sum(f.dim, 0.0);
    Vec left = f.value(mesh.a());
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        const Vec mid = f.value(mesh.midpoint(e));
        const Vec right = f.value(mesh.node(e + 1));
        const double w = mesh.h(e) / 6.0;
        for (std::size_t j = 0; j < f.dim; ++j)
            sum[j] += w * (left[j] + 4.0 * mid[j] + right[j]);
        left = right;
    }
    return sum;
}

} // namespace eflow
