#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eflow/mesh.hpp"
#include "eflow/quadrature.hpp"

namespace eflow {

using Vec = std::vector<double>;

enum class DofKind : std::size_t { value = 0, slope = 1 };

/// Flat index of a Hermite degree of freedom.
///
/// Node-major, component-minor, value before slope:
///   index(i, j, kind) = 2 * (i * dim + j) + kind.
/// Element e couples nodes e and e+1, so coupled indices differ by at most 4*dim - 1.
struct DofLayout {
    std::size_t nodes = 0;
    std::size_t dim = 0;

    std::size_t size() const noexcept { return 2 * nodes * dim; }
    std::size_t index(std::size_t node, std::size_t comp, DofKind kind) const noexcept
    {
        return 2 * (node * dim + comp) + static_cast<std::size_t>(kind);
    }
    std::size_t node_of(std::size_t idx) const noexcept { return idx / (2 * dim); }

    /// The 4 local dofs of component j on element e, ordered (v_left, s_left, v_right, s_right).
    std::array<std::size_t, 4> element_dofs(std::size_t e, std::size_t comp) const noexcept
    {
        return {index(e, comp, DofKind::value), index(e, comp, DofKind::slope),
                index(e + 1, comp, DofKind::value), index(e + 1, comp, DofKind::slope)};
    }
};

/// Cubic Hermite shape functions on [0, 1] for an element of length h, and their
/// x-derivatives up to order 3. Slope shape functions carry the factor h so that the
/// slope dofs are physical derivatives.
inline std::array<double, 4> hermite_shape(double s, double h, int k)
{
    const double s2 = s * s, s3 = s2 * s;
    switch (k) {
    case 0:
        return {1.0 - 3.0 * s2 + 2.0 * s3, h * (s - 2.0 * s2 + s3), 3.0 * s2 - 2.0 * s3,
                h * (s3 - s2)};
    case 1:
        return {(-6.0 * s + 6.0 * s2) / h, 1.0 - 4.0 * s + 3.0 * s2, (6.0 * s - 6.0 * s2) / h,
                3.0 * s2 - 2.0 * s};
    case 2: {
        const double h2 = h * h;
        return {(-6.0 + 12.0 * s) / h2, (-4.0 + 6.0 * s) / h, (6.0 - 12.0 * s) / h2,
                (6.0 * s - 2.0) / h};
    }
    case 3: {
        const double h2 = h * h, h3 = h2 * h;
        return {12.0 / h3, 6.0 / h2, -12.0 / h3, 6.0 / h2};
    }
    default:
        throw std::invalid_argument("hermite_shape: derivative order must be 0..3");
    }
}

/// A d-valued piecewise cubic C^1 curve in Hermite form.
class CurveState {
public:
    CurveState(std::shared_ptr<const Dissection> mesh, std::size_t dim)
        : mesh_(std::move(mesh)), layout_{mesh_->node_count(), dim}, coeffs_(layout_.size(), 0.0)
    {
        if (dim == 0)
            throw std::invalid_argument("CurveState: dimension must be positive");
    }

    CurveState(std::shared_ptr<const Dissection> mesh, std::size_t dim, Vec coeffs)
        : mesh_(std::move(mesh)), layout_{mesh_->node_count(), dim}, coeffs_(std::move(coeffs))
    {
        if (coeffs_.size() != layout_.size())
            throw std::invalid_argument("CurveState: coefficient vector has length " +
                                        std::to_string(coeffs_.size()) + ", expected " +
                                        std::to_string(layout_.size()));
    }

    const Dissection& mesh() const noexcept { return *mesh_; }
    const std::shared_ptr<const Dissection>& mesh_ptr() const noexcept { return mesh_; }
    std::size_t dim() const noexcept { return layout_.dim; }
    const DofLayout& layout() const noexcept { return layout_; }

    const Vec& coeffs() const noexcept { return coeffs_; }
    Vec& coeffs() noexcept { return coeffs_; }

    double value(std::size_t node, std::size_t comp) const
    {
        return coeffs_[layout_.index(node, comp, DofKind::value)];
    }
    double slope(std::size_t node, std::size_t comp) const
    {
        return coeffs_[layout_.index(node, comp, DofKind::slope)];
    }
    void set(std::size_t node, std::size_t comp, DofKind kind, double v)
    {
        coeffs_[layout_.index(node, comp, kind)] = v;
    }

    bool same_space(const CurveState& other) const noexcept
    {
        return dim() == other.dim() &&
               (mesh_ == other.mesh_ || mesh_->nodes() == other.mesh_->nodes());
    }

    /// k-th derivative on element e at reference coordinate s.
    Vec eval_local(std::size_t e, double s, int k) const
    {
        const auto phi = hermite_shape(s, mesh_->h(e), k);
        Vec out(dim(), 0.0);
        for (std::size_t j = 0; j < dim(); ++j) {
            const auto dofs = layout_.element_dofs(e, j);
            for (std::size_t l = 0; l < 4; ++l)
                out[j] += phi[l] * coeffs_[dofs[l]];
        }
        return out;
    }

private:
    std::shared_ptr<const Dissection> mesh_;
    DofLayout layout_;
    Vec coeffs_;
};

/// k-th derivative of u at x. At an interior node the left element is used.
inline Vec eval(const CurveState& u, double x, int k)
{
    if (k < 0 || k > 3)
        throw std::invalid_argument("eval: derivative order must be 0..3");
    const auto& mesh = u.mesh();
    const std::size_t e = mesh.locate(x);
    const double s = (x - mesh.node(e)) / mesh.h(e);
    return u.eval_local(e, s, k);
}

namespace detail {

inline std::size_t exact_points_for(int k)
{
    // integrand |D^k u|^2 has degree 2(3-k) per element
    switch (k) {
    case 0: return 4;
    case 1: return 3;
    case 2: return 2;
    case 3: return 1;
    default: throw std::invalid_argument("seminorm order must be 0..3");
    }
}

} // namespace detail

/// int_I D^k u . D^k v dx, exact by Gauss quadrature.
inline double inner(const CurveState& u, const CurveState& v, int k)
{
    if (!u.same_space(v))
        throw std::invalid_argument("inner: curves live on different meshes or dimensions");
    const auto rule = gauss_rule(detail::exact_points_for(k));
    const auto& mesh = u.mesh();
    double sum = 0.0;
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        double local = 0.0;
        for (const auto& q : rule) {
            const Vec du = u.eval_local(e, q.s, k);
            const Vec dv = v.eval_local(e, q.s, k);
            double dot = 0.0;
            for (std::size_t j = 0; j < du.size(); ++j)
                dot += du[j] * dv[j];
            local += q.weight * dot;
        }
        sum += mesh.h(e) * local;
    }
    return sum;
}

/// int_I |D^k u|^2 dx.
inline double seminorm_sq(const CurveState& u, int k) { return inner(u, u, k); }

/// int_I u_xx . v_xx dx.
inline double inner_h2(const CurveState& u, const CurveState& v) { return inner(u, v, 2); }

/// Bending energy 1/2 |u|_{H^2}^2.
inline double bending_energy(const CurveState& u) { return 0.5 * seminorm_sq(u, 2); }

/// Writes `x,z1,...,zd` samples: `per_element` points per element plus x = b.
inline void write_snapshot_csv(std::ostream& os, const CurveState& u, std::size_t per_element = 10)
{
    if (per_element == 0)
        throw std::invalid_argument("write_snapshot_csv: need at least one sample per element");
    const auto& mesh = u.mesh();
    os << "x";
    for (std::size_t j = 0; j < u.dim(); ++j)
        os << ",z" << (j + 1);
    os << '\n';
    os << std::setprecision(17);
    auto row = [&](double x, const Vec& z) {
        os << x;
        for (double c : z)
            os << ',' << c;
        os << '\n';
    };
    for (std::size_t e = 0; e < mesh.elements(); ++e)
        for (std::size_t p = 0; p < per_element; ++p) {
            const double s = static_cast<double>(p) / static_cast<double>(per_element);
            row(mesh.node(e) + s * mesh.h(e), u.eval_local(e, s, 0));
        }
    row(mesh.b(), u.eval_local(mesh.elements() - 1, 1.0, 0));
}

} // namespace eflow
