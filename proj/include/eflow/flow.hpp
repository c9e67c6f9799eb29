#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eflow/assembly.hpp"
#include "eflow/forcing.hpp"
#include "eflow/hermite.hpp"
#include "eflow/interpolate.hpp"
#include "eflow/saddle.hpp"

namespace eflow {

struct FlowConfig {
    std::shared_ptr<const Dissection> mesh;
    double tau = 0.1;
    double T = 1.0;
    ConstraintMode mode = ConstraintMode::P2;
    BoundarySpec bc;
    AnalyticFlow initial;            // z0 = initial.z(., 0); also the exact solution
    bool forced = false;             // apply the manufactured forcing and moving boundary data
    std::size_t snapshot_stride = 10;
    bool keep_trajectory = false;

    std::size_t dim() const noexcept { return initial.dim; }

    std::size_t steps() const
    {
        const double n = std::round(T / tau);
        if (!(tau > 0.0) || !(T >= tau) || std::abs(n * tau - T) > 1e-12 * std::max(1.0, T))
            throw std::invalid_argument("FlowConfig: T must be a positive multiple of tau (T = " +
                                        std::to_string(T) + ", tau = " + std::to_string(tau) + ")");
        return static_cast<std::size_t>(n);
    }

    void validate() const
    {
        if (!mesh)
            throw std::invalid_argument("FlowConfig: mesh not set");
        if (initial.dim == 0)
            throw std::invalid_argument("FlowConfig: initial curve not set");
        if (std::abs(mesh->a() - initial.a) > 1e-12 || std::abs(mesh->b() - initial.b) > 1e-12)
            throw std::invalid_argument("FlowConfig: mesh interval does not match the flow's interval");
        bc.validate();
        (void)steps();
    }
};

struct StepReport {
    std::size_t n = 0;
    double t = 0.0;
    double energy = 0.0;          // 1/2 |Z^n|_{H^2}^2
    double dissipation_l2 = 0.0;  // ||d_t Z^n||^2
    double dissipation_h2 = 0.0;  // tau |d_t Z^n|_{H^2}^2
    double constraint_violation = 0.0;
    double kkt_residual = 0.0;
    std::size_t zero_rows = 0;    // degenerate arc-length rows (|Z_x| = 0) left out
};

/// Constraint points of the mode: N_1 or N_2.
inline std::vector<double> constraint_points(const Dissection& mesh, ConstraintMode mode)
{
    return mode == ConstraintMode::P1 ? mesh.nodes_p1() : mesh.nodes_p2();
}

/// max over constraint points of | |Z_x|^2 - 1 |.
inline double constraint_violation(const CurveState& Z, ConstraintMode mode)
{
    double worst = 0.0;
    for (double x : constraint_points(Z.mesh(), mode)) {
        const Vec zx = eval(Z, x, 1);
        worst = std::max(worst, std::abs(detail::dot(zx, zx) - 1.0));
    }
    return worst;
}

/// Z^0 = J_{h,3} z0. Rejects initial curves that are not unit speed at the constraint points.
inline CurveState init_state(const FlowConfig& cfg)
{
    const auto z0 = cfg.initial.at(0.0);
    for (double x : constraint_points(*cfg.mesh, cfg.mode)) {
        const Vec d = z0.derivative(x);
        const double dev = std::abs(detail::dot(d, d) - 1.0);
        if (dev > 1e-8)
            throw std::invalid_argument("init_state: |z0'(x)|^2 deviates from 1 by " +
                                        std::to_string(dev) + " at x = " + std::to_string(x));
    }
    return interp_j3(z0, cfg.mesh);
}

struct StepResult {
    CurveState next;
    Vec rate; // d_t Z^{n+1}
    StepReport report;
};

/// One run's worth of assembled operators; advances Z^n to Z^{n+1}.
class Stepper {
public:
    explicit Stepper(FlowConfig cfg)
        : cfg_(checked(std::move(cfg))),
          mass_(mass_matrix(*cfg_.mesh, cfg_.dim())),
          stiff_(stiffness_matrix(*cfg_.mesh, cfg_.dim())),
          system_(mass_.plus_scaled(stiff_, cfg_.tau))
    {
    }

    const FlowConfig& config() const noexcept { return cfg_; }
    const SymBandMatrix& mass() const noexcept { return mass_; }
    const SymBandMatrix& stiffness() const noexcept { return stiff_; }

    /// Builds the KKT system for the step from t_n to t_{n+1}.
    SaddleSystem build_system(const CurveState& Z, std::size_t n) const
    {
        const double tau = cfg_.tau;
        const ConstraintMatrix arc = constraint_matrix(Z, cfg_.mode);
        std::optional<BoundaryMotion> motion;
        if (cfg_.forced)
            motion = BoundaryMotion{cfg_.initial.z, cfg_.initial.z_x, time(n), time(n + 1)};
        const ConstraintMatrix bnd = boundary_rows(cfg_.bc, Z, tau, motion ? &*motion : nullptr);

        SaddleSystem sys;
        sys.A = system_;
        sys.B = stack_constraints(arc, bnd, cfg_.bc, Z.mesh().node_count() - 1);
        sys.dofs_per_node = 2 * cfg_.dim();
        const auto& z = Z.coeffs();
        if (cfg_.forced) {
            const ForcedTerms f = forced_terms(cfg_.initial, cfg_.mesh, time(n + 1));
            sys.rhs_primal = forced_load(Z, f.U, f.V, f.W, mass_, stiff_);
        } else {
            sys.rhs_primal = stiff_.multiply(z);
            for (double& v : sys.rhs_primal)
                v = -v;
        }
        return sys;
    }

    StepResult step(const CurveState& Z, std::size_t n) const
    {
        const SaddleSystem sys = build_system(Z, n);
        KktSolution sol = solve_kkt(sys);

        StepResult out{Z, std::move(sol.primal), {}};
        auto& next = out.next.coeffs();
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] += cfg_.tau * out.rate[i];

        StepReport& rep = out.report;
        rep.n = n + 1;
        rep.t = time(n + 1);
        rep.energy = 0.5 * stiff_.quad_form(next);
        rep.dissipation_l2 = mass_.quad_form(out.rate);
        rep.dissipation_h2 = cfg_.tau * stiff_.quad_form(out.rate);
        rep.constraint_violation = constraint_violation(out.next, cfg_.mode);
        rep.kkt_residual = sol.residual;
        rep.zero_rows = sol.dropped_rows.size();
        return out;
    }

    double time(std::size_t n) const noexcept { return static_cast<double>(n) * cfg_.tau; }

private:
    static FlowConfig checked(FlowConfig cfg)
    {
        cfg.validate();
        return cfg;
    }

    FlowConfig cfg_;
    SymBandMatrix mass_;
    SymBandMatrix stiff_;
    SymBandMatrix system_;
};

/// Single step with a freshly assembled stepper.
inline StepResult step(const CurveState& Z, const FlowConfig& cfg, std::size_t n)
{
    return Stepper(cfg).step(Z, n);
}

struct Snapshot {
    std::size_t n = 0;
    double t = 0.0;
    CurveState state;
};

struct RunResult {
    CurveState initial;
    CurveState final_state;
    std::vector<StepReport> reports;
    std::vector<Snapshot> snapshots; // n = 0, every stride-th step, and the last step
};

/// Called after every step with (n, Z^n, d_t Z^n); n starts at 1.
using StepObserver = std::function<void(std::size_t n, const CurveState& Z, std::span<const double> rate)>;

inline RunResult run(const FlowConfig& cfg, const StepObserver& observe = {})
{
    const Stepper stepper(cfg);
    const std::size_t steps = cfg.steps();
    const std::size_t stride = cfg.keep_trajectory ? 1 : std::max<std::size_t>(cfg.snapshot_stride, 1);

    RunResult res{init_state(cfg), init_state(cfg), {}, {}};
    res.reports.reserve(steps);
    res.snapshots.push_back({0, 0.0, res.initial});
    CurveState Z = res.initial;
    for (std::size_t n = 0; n < steps; ++n) {
        StepResult s = stepper.step(Z, n);
        Z = std::move(s.next);
        if (observe)
            observe(n + 1, Z, s.rate);
        if ((n + 1) % stride == 0 || n + 1 == steps)
            res.snapshots.push_back({n + 1, s.report.t, Z});
        res.reports.push_back(s.report);
    }
    res.final_state = std::move(Z);
    return res;
}

inline void write_reports_csv(std::ostream& os, const std::vector<StepReport>& reports)
{
    os << "n,t,energy,dissipation_l2,dissipation_h2,constraint_violation,kkt_residual\n";
    os << std::setprecision(17);
    for (const auto& r : reports)
        os << r.n << ',' << r.t << ',' << r.energy << ',' << r.dissipation_l2 << ','
           << r.dissipation_h2 << ',' << r.constraint_violation << ',' << r.kkt_residual << '\n';
}

} // namespace eflow
