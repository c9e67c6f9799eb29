#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <lapacke.h>

#include "eflow/assembly.hpp"
#include "eflow/banded.hpp"

namespace eflow {

/// Raised when the KKT system cannot be solved; `rows` names the constraint rows (or
/// primal dofs) at which the factorization broke down.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::vector<std::string> rows = {})
        : std::runtime_error(what), rows_(std::move(rows))
    {
    }
    const std::vector<std::string>& rows() const noexcept { return rows_; }

private:
    std::vector<std::string> rows_;
};

/// [A, B^T; B, 0] [x; lambda] = [f; q] with A = M + tau S.
struct SaddleSystem {
    SymBandMatrix A;
    ConstraintMatrix B;
    std::vector<double> rhs_primal;
    std::size_t dofs_per_node = 1; // grouping used for the banded ordering
};

struct KktSolution {
    std::vector<double> primal;
    std::vector<double> multipliers;        // one per row of B (0 for dropped rows)
    double residual = 0.0;
    std::vector<std::string> dropped_rows;  // all-zero rows left out of the factorization
};

namespace detail {

inline double inf_norm(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

/// Residual pieces of a candidate solution: r_primal = f - A x - B^T l, r_dual = q - B x.
inline std::pair<std::vector<double>, std::vector<double>>
kkt_residual(const SaddleSystem& sys, const std::vector<std::size_t>& active,
             const std::vector<double>& x, const std::vector<double>& lambda)
{
    auto rp = sys.A.multiply(x);
    for (std::size_t k = 0; k < active.size(); ++k)
        for (const auto& [c, v] : sys.B.rows[active[k]].entries)
            rp[c] += v * lambda[k];
    for (std::size_t i = 0; i < rp.size(); ++i)
        rp[i] = sys.rhs_primal[i] - rp[i];
    std::vector<double> rd(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
        const auto& row = sys.B.rows[active[k]];
        rd[k] = row.rhs - row.apply(x);
    }
    return {std::move(rp), std::move(rd)};
}

} // namespace detail

/// Direct solve of the saddle-point system.
///
/// Unknowns are ordered node by node, each constraint multiplier placed right after the
/// primal dofs of the first node it touches. This keeps the KKT matrix banded; it is then
/// factorized by banded LU with partial pivoting and polished by iterative refinement.
inline KktSolution solve_kkt(const SaddleSystem& sys)
{
    const std::size_t np = sys.A.size();
    if (sys.rhs_primal.size() != np || sys.B.cols != np)
        throw std::invalid_argument("solve_kkt: inconsistent system dimensions");
    const std::size_t dof_per_node = std::max<std::size_t>(sys.dofs_per_node, 1);

    KktSolution sol;
    std::vector<std::size_t> active;
    for (std::size_t r = 0; r < sys.B.size(); ++r) {
        if (sys.B.rows[r].is_zero())
            sol.dropped_rows.push_back(sys.B.rows[r].label());
        else
            active.push_back(r);
    }
    const std::size_t nc = active.size();
    const std::size_t n = np + nc;

    // position ordering
    std::vector<std::tuple<std::size_t, int, std::size_t>> keys;
    keys.reserve(n);
    for (std::size_t i = 0; i < np; ++i)
        keys.emplace_back(i / dof_per_node, 0, i);
    for (std::size_t k = 0; k < nc; ++k) {
        std::size_t first = np;
        for (const auto& [c, v] : sys.B.rows[active[k]].entries)
            if (v != 0.0)
                first = std::min(first, c);
        keys.emplace_back(first / dof_per_node, 1, np + k);
    }
    std::sort(keys.begin(), keys.end());
    std::vector<std::size_t> pos(n), unknown_at(n);
    for (std::size_t p = 0; p < n; ++p) {
        unknown_at[p] = std::get<2>(keys[p]);
        pos[unknown_at[p]] = p;
    }

    auto distance = [&](std::size_t u, std::size_t v) {
        return pos[u] > pos[v] ? pos[u] - pos[v] : pos[v] - pos[u];
    };
    std::size_t band = 0;
    for (std::size_t j = 0; j < np; ++j)
        for (std::size_t i = j; i < std::min(np, j + sys.A.bandwidth() + 1); ++i)
            if (sys.A(i, j) != 0.0)
                band = std::max(band, distance(i, j));
    for (std::size_t k = 0; k < nc; ++k)
        for (const auto& [c, v] : sys.B.rows[active[k]].entries)
            if (v != 0.0)
                band = std::max(band, distance(c, np + k));

    const lapack_int kl = static_cast<lapack_int>(band), ku = kl;
    const lapack_int ldab = 2 * kl + ku + 1;
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
    double scale = 0.0;
    auto put = [&](std::size_t u, std::size_t v, double val) {
        const std::size_t i = pos[u], j = pos[v];
        ab[static_cast<std::size_t>(kl + ku) + i - j + j * static_cast<std::size_t>(ldab)] = val;
        scale = std::max(scale, std::abs(val));
    };
    for (std::size_t j = 0; j < np; ++j)
        for (std::size_t i = j; i < std::min(np, j + sys.A.bandwidth() + 1); ++i) {
            const double a = sys.A(i, j);
            if (a == 0.0)
                continue;
            put(i, j, a);
            if (i != j)
                put(j, i, a);
        }
    for (std::size_t k = 0; k < nc; ++k)
        for (const auto& [c, v] : sys.B.rows[active[k]].entries) {
            put(np + k, c, v);
            put(c, np + k, v);
        }

    auto name_of = [&](std::size_t unknown) {
        if (unknown >= np)
            return sys.B.rows[active[unknown - np]].label();
        return "primal dof " + std::to_string(unknown);
    };

    std::vector<lapack_int> ipiv(n);
    const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(n),
                                           static_cast<lapack_int>(n), kl, ku, ab.data(), ldab,
                                           ipiv.data());
    if (info < 0)
        throw SolverError("solve_kkt: invalid argument " + std::to_string(-info) + " to dgbtrf");
    const double pivot_floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
    std::vector<std::string> offending;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double u = std::abs(ab[static_cast<std::size_t>(kl + ku) + j * static_cast<std::size_t>(ldab)]);
        min_pivot = std::min(min_pivot, u);
        if (u <= pivot_floor)
            offending.push_back(name_of(unknown_at[j]));
    }
    if (info > 0 || !offending.empty()) {
        std::string msg = "solve_kkt: singular KKT matrix (rank-deficient constraints?); min |pivot| = " +
                          std::to_string(min_pivot) + ", matrix scale = " + std::to_string(scale) +
                          "; offending:";
        for (const auto& s : offending)
            msg += " " + s;
        throw SolverError(msg, offending);
    }

    // permuted right-hand side and solve
    auto solve_permuted = [&](const std::vector<double>& rp, const std::vector<double>& rd) {
        std::vector<double> b(n);
        for (std::size_t i = 0; i < np; ++i)
            b[pos[i]] = rp[i];
        for (std::size_t k = 0; k < nc; ++k)
            b[pos[np + k]] = rd[k];
        const lapack_int st = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(n), kl, ku,
                                             1, ab.data(), ldab, ipiv.data(), b.data(),
                                             static_cast<lapack_int>(n));
        if (st != 0)
            throw SolverError("solve_kkt: dgbtrs failed with status " + std::to_string(st));
        std::vector<double> x(np), l(nc);
        for (std::size_t i = 0; i < np; ++i)
            x[i] = b[pos[i]];
        for (std::size_t k = 0; k < nc; ++k)
            l[k] = b[pos[np + k]];
        return std::pair{std::move(x), std::move(l)};
    };

    std::vector<double> q(nc);
    for (std::size_t k = 0; k < nc; ++k)
        q[k] = sys.B.rows[active[k]].rhs;
    auto [x, lambda] = solve_permuted(sys.rhs_primal, q);

    const double rhs_norm = std::max(detail::inf_norm(sys.rhs_primal), detail::inf_norm(q));
    const double tol = 1e-9 * (1.0 + rhs_norm);
    double residual = 0.0;
    for (int sweep = 0; sweep < 4; ++sweep) {
        auto [rp, rd] = detail::kkt_residual(sys, active, x, lambda);
        residual = detail::inf_norm(rp) + detail::inf_norm(rd);
        if (residual <= 1e-3 * tol || sweep == 3)
            break;
        auto [dx, dl] = solve_permuted(rp, rd);
        for (std::size_t i = 0; i < np; ++i)
            x[i] += dx[i];
        for (std::size_t k = 0; k < nc; ++k)
            lambda[k] += dl[k];
    }
    if (!(residual <= tol))
        throw SolverError("solve_kkt: residual " + std::to_string(residual) +
                          " exceeds tolerance " + std::to_string(tol) +
                          " after refinement; min |pivot| = " + std::to_string(min_pivot));

    sol.primal = std::move(x);
    sol.multipliers.assign(sys.B.size(), 0.0);
    for (std::size_t k = 0; k < nc; ++k)
        sol.multipliers[active[k]] = lambda[k];
    sol.residual = residual;
    return sol;
}

} // namespace eflow
