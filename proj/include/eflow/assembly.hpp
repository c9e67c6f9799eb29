#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eflow/banded.hpp"
#include "eflow/hermite.hpp"
#include "eflow/mesh.hpp"
#include "eflow/quadrature.hpp"

namespace eflow {

/// Where the linearized arc-length constraint is imposed: N_1 (nodes) or N_2
/// (nodes and midpoints).
enum class ConstraintMode { P1, P2 };

inline const char* to_string(ConstraintMode m) { return m == ConstraintMode::P1 ? "P1" : "P2"; }

inline ConstraintMode parse_mode(const std::string& s)
{
    if (s == "P1" || s == "p1")
        return ConstraintMode::P1;
    if (s == "P2" || s == "p2")
        return ConstraintMode::P2;
    throw std::invalid_argument("unknown constraint mode '" + s + "' (expected P1 or P2)");
}

// ---------------------------------------------------------------------------
// Galerkin matrices

namespace detail {

template <std::size_t Points>
SymBandMatrix assemble_derivative_gram(const Dissection& mesh, std::size_t dim, int k)
{
    const DofLayout layout{mesh.node_count(), dim};
    SymBandMatrix mat(layout.size(), 4 * dim - 1);
    const auto rule = gauss_rule(Points);
    for (std::size_t e = 0; e < mesh.elements(); ++e) {
        const double h = mesh.h(e);
        std::array<std::array<double, 4>, 4> local{};
        for (const auto& q : rule) {
            const auto phi = hermite_shape(q.s, h, k);
            for (std::size_t r = 0; r < 4; ++r)
                for (std::size_t c = 0; c < 4; ++c)
                    local[r][c] += h * q.weight * phi[r] * phi[c];
        }
        for (std::size_t j = 0; j < dim; ++j) {
            const auto dofs = layout.element_dofs(e, j);
            for (std::size_t r = 0; r < 4; ++r)
                for (std::size_t c = 0; c <= r; ++c)
                    mat.add(dofs[r], dofs[c], local[r][c]);
        }
    }
    return mat;
}

} // namespace detail

/// (M u, v) = int u . v dx.
inline SymBandMatrix mass_matrix(const Dissection& mesh, std::size_t dim)
{
    return detail::assemble_derivative_gram<4>(mesh, dim, 0);
}

/// (K u, v) = int u_x . v_x dx.
inline SymBandMatrix h1_stiffness_matrix(const Dissection& mesh, std::size_t dim)
{
    return detail::assemble_derivative_gram<3>(mesh, dim, 1);
}

/// (S u, v) = int u_xx . v_xx dx.
inline SymBandMatrix stiffness_matrix(const Dissection& mesh, std::size_t dim)
{
    return detail::assemble_derivative_gram<2>(mesh, dim, 2);
}

// ---------------------------------------------------------------------------
// Constraint rows

enum class RowKind { arc_node, arc_midpoint, bc_value, bc_slope, periodic_value, periodic_slope };

struct ConstraintRow {
    std::vector<std::pair<std::size_t, double>> entries; // (column, coefficient), sorted
    double rhs = 0.0;
    RowKind kind = RowKind::arc_node;
    double point = 0.0;    // parameter x~ the row lives at
    std::size_t node = 0;  // node index, or element index for midpoint rows
    std::size_t comp = 0;  // component for boundary rows

    bool is_zero() const noexcept
    {
        return std::all_of(entries.begin(), entries.end(),
                           [](const auto& e) { return e.second == 0.0; });
    }

    double apply(std::span<const double> x) const
    {
        double s = 0.0;
        for (const auto& [c, v] : entries)
            s += v * x[c];
        return s;
    }

    std::string label() const
    {
        switch (kind) {
        case RowKind::arc_node: return "arc_length@node" + std::to_string(node);
        case RowKind::arc_midpoint: return "arc_length@midpoint" + std::to_string(node);
        case RowKind::bc_value:
            return "bc_value@node" + std::to_string(node) + "[" + std::to_string(comp) + "]";
        case RowKind::bc_slope:
            return "bc_slope@node" + std::to_string(node) + "[" + std::to_string(comp) + "]";
        case RowKind::periodic_value: return "periodic_value[" + std::to_string(comp) + "]";
        case RowKind::periodic_slope: return "periodic_slope[" + std::to_string(comp) + "]";
        }
        return "row";
    }
};

/// Sparse rows B together with the right-hand side q.
struct ConstraintMatrix {
    std::size_t cols = 0;
    std::vector<ConstraintRow> rows;

    std::size_t size() const noexcept { return rows.size(); }

    std::vector<double> apply(std::span<const double> x) const
    {
        std::vector<double> out(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            out[r] = rows[r].apply(x);
        return out;
    }

    std::vector<double> apply_transpose(std::span<const double> lambda) const
    {
        std::vector<double> out(cols, 0.0);
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (const auto& [c, v] : rows[r].entries)
                out[c] += v * lambda[r];
        return out;
    }

    std::vector<double> rhs() const
    {
        std::vector<double> q(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            q[r] = rows[r].rhs;
        return q;
    }

    void append(const ConstraintMatrix& other)
    {
        if (other.cols != cols)
            throw std::invalid_argument("ConstraintMatrix::append: column count mismatch");
        rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    }
};

/// Linearized arc-length rows Y -> Y_x(x~) . Z_x(x~) at every constraint point of the mode.
/// Nodal rows read the slope dofs; midpoint rows use the derivative stencil of one element.
inline ConstraintMatrix constraint_matrix(const CurveState& Z, ConstraintMode mode)
{
    const auto& mesh = Z.mesh();
    const auto& layout = Z.layout();
    const std::size_t d = Z.dim();
    ConstraintMatrix B{layout.size(), {}};

    auto nodal_row = [&](std::size_t i) {
        ConstraintRow row;
        row.kind = RowKind::arc_node;
        row.point = mesh.node(i);
        row.node = i;
        for (std::size_t j = 0; j < d; ++j)
            row.entries.emplace_back(layout.index(i, j, DofKind::slope), Z.slope(i, j));
        B.rows.push_back(std::move(row));
    };
    auto midpoint_row = [&](std::size_t e) {
        ConstraintRow row;
        row.kind = RowKind::arc_midpoint;
        row.point = mesh.midpoint(e);
        row.node = e;
        const Vec zx = Z.eval_local(e, 0.5, 1);
        const auto dphi = hermite_shape(0.5, mesh.h(e), 1);
        for (std::size_t j = 0; j < d; ++j) {
            const auto dofs = layout.element_dofs(e, j);
            for (std::size_t l = 0; l < 4; ++l)
                row.entries.emplace_back(dofs[l], dphi[l] * zx[j]);
        }
        std::sort(row.entries.begin(), row.entries.end());
        B.rows.push_back(std::move(row));
    };

    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        nodal_row(i);
        if (mode == ConstraintMode::P2 && i + 1 < mesh.node_count())
            midpoint_row(i);
    }
    return B;
}

/// Which endpoint data is prescribed. Positions may be fixed at a and/or b, slopes at a
/// and/or b; periodic couples the two endpoints.
struct BoundarySpec {
    bool value_a = false;
    bool value_b = false;
    bool slope_a = false;
    bool slope_b = false;
    bool periodic = false;

    static BoundarySpec semi_clamped() { return {true, false, true, true, false}; }
    static BoundarySpec clamped() { return {true, true, true, true, false}; }
    static BoundarySpec free() { return {}; }
    static BoundarySpec periodic_ends() { return {false, false, false, false, true}; }

    void validate() const
    {
        if (periodic && ((value_a && value_b) || (slope_a && slope_b)))
            throw std::invalid_argument(
                "BoundarySpec: periodic conditions cannot be combined with fixed data at both ends");
    }

    bool operator==(const BoundarySpec&) const = default;
};

/// Prescribed endpoint motion between two time levels. q rows become difference
/// quotients (g(t_to) - g(t_from)) / tau.
struct BoundaryMotion {
    std::function<Vec(double x, double t)> value;
    std::function<Vec(double x, double t)> slope;
    double t_from = 0.0;
    double t_to = 0.0;
};

inline ConstraintMatrix boundary_rows(const BoundarySpec& bc, const CurveState& Z, double tau,
                                      const BoundaryMotion* motion = nullptr)
{
    bc.validate();
    if (!(tau > 0.0))
        throw std::invalid_argument("boundary_rows: time step must be positive");
    const auto& mesh = Z.mesh();
    const auto& layout = Z.layout();
    const std::size_t d = Z.dim();
    const std::size_t last = mesh.node_count() - 1;
    ConstraintMatrix B{layout.size(), {}};

    auto fixed = [&](std::size_t node, DofKind kind) {
        const double x = mesh.node(node);
        Vec q(d, 0.0);
        if (motion) {
            const auto& g = kind == DofKind::value ? motion->value : motion->slope;
            const Vec g1 = g(x, motion->t_to);
            const Vec g0 = g(x, motion->t_from);
            for (std::size_t j = 0; j < d; ++j)
                q[j] = (g1[j] - g0[j]) / tau;
        }
        for (std::size_t j = 0; j < d; ++j) {
            ConstraintRow row;
            row.kind = kind == DofKind::value ? RowKind::bc_value : RowKind::bc_slope;
            row.point = x;
            row.node = node;
            row.comp = j;
            row.entries.emplace_back(layout.index(node, j, kind), 1.0);
            row.rhs = q[j];
            B.rows.push_back(std::move(row));
        }
    };

    if (bc.value_a) fixed(0, DofKind::value);
    if (bc.slope_a) fixed(0, DofKind::slope);
    if (bc.value_b) fixed(last, DofKind::value);
    if (bc.slope_b) fixed(last, DofKind::slope);

    if (bc.periodic) {
        for (DofKind kind : {DofKind::value, DofKind::slope})
            for (std::size_t j = 0; j < d; ++j) {
                ConstraintRow row;
                row.kind = kind == DofKind::value ? RowKind::periodic_value : RowKind::periodic_slope;
                row.point = mesh.a();
                row.node = 0;
                row.comp = j;
                row.entries.emplace_back(layout.index(0, j, kind), 1.0);
                row.entries.emplace_back(layout.index(last, j, kind), -1.0);
                B.rows.push_back(std::move(row));
            }
    }
    return B;
}

/// Constraint block of one time step: arc-length rows followed by boundary rows.
///
/// An endpoint arc-length row is omitted when the endpoint slope is prescribed (the slope
/// rows already fix d_tZ_x there), and the row at b is omitted under periodic coupling.
/// Exact structural duplicates are removed.
inline ConstraintMatrix stack_constraints(const ConstraintMatrix& arc, const ConstraintMatrix& bnd,
                                          const BoundarySpec& bc, std::size_t last_node)
{
    ConstraintMatrix B{arc.cols, {}};
    for (const auto& row : arc.rows) {
        if (row.kind == RowKind::arc_node) {
            if (row.node == 0 && bc.slope_a) continue;
            if (row.node == last_node && (bc.slope_b || bc.periodic)) continue;
        }
        B.rows.push_back(row);
    }
    B.append(bnd);

    ConstraintMatrix unique{B.cols, {}};
    for (auto& row : B.rows) {
        const bool dup = std::any_of(unique.rows.begin(), unique.rows.end(), [&](const auto& u) {
            return u.entries == row.entries && u.rhs == row.rhs;
        });
        if (!dup)
            unique.rows.push_back(std::move(row));
    }
    return unique;
}

/// M (V - W) + S (U - Z): the load of the manufactured-solution scheme.
inline std::vector<double> forced_load(const CurveState& Z, const CurveState& U, const CurveState& V,
                                       const CurveState& W, const SymBandMatrix& mass,
                                       const SymBandMatrix& stiff)
{
    const std::size_t n = Z.coeffs().size();
    if (U.coeffs().size() != n || V.coeffs().size() != n || W.coeffs().size() != n ||
        mass.size() != n || stiff.size() != n)
        throw std::invalid_argument("forced_load: shape mismatch");
    std::vector<double> vw(n), uz(n);
    for (std::size_t i = 0; i < n; ++i) {
        vw[i] = V.coeffs()[i] - W.coeffs()[i];
        uz[i] = U.coeffs()[i] - Z.coeffs()[i];
    }
    auto out = mass.multiply(vw);
    const auto s = stiff.multiply(uz);
    for (std::size_t i = 0; i < n; ++i)
        out[i] += s[i];
    return out;
}

} // namespace eflow
