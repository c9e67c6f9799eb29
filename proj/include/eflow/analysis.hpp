#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <future>
#include <iomanip>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eflow/assembly.hpp"
#include "eflow/flow.hpp"
#include "eflow/forcing.hpp"
#include "eflow/interpolate.hpp"
#include "eflow/quadrature.hpp"

namespace eflow {

enum class Norm { LinfH2, H1L2, LinfH1, LinfL2 };

inline const char* to_string(Norm n)
{
    switch (n) {
    case Norm::LinfH2: return "LinfH2";
    case Norm::H1L2: return "H1L2";
    case Norm::LinfH1: return "LinfH1";
    case Norm::LinfL2: return "LinfL2";
    }
    return "?";
}

inline Norm parse_norm(const std::string& s)
{
    for (Norm n : {Norm::LinfH2, Norm::H1L2, Norm::LinfH1, Norm::LinfL2})
        if (s == to_string(n))
            return n;
    throw std::invalid_argument("unknown norm '" + s + "' (expected LinfH2, H1L2, LinfH1 or LinfL2)");
}

struct ErrorReport {
    double e_LinfH2 = 0.0; // max_n |z(t_n) - Z^n|_{H^2}
    double e_H1L2 = 0.0;   // (tau sum_n ||I_{h,3} z_t(t_n) - d_t Z^n||^2)^{1/2}
    double e_LinfH1 = 0.0; // max_n |I_{h,3} z(t_n) - Z^n|_{H^1}
    double e_LinfL2 = 0.0; // max_n ||I_{h,3} z(t_n) - Z^n||
    double h = 0.0;
    double tau = 0.0;
    std::size_t elements = 0;
    ConstraintMode mode = ConstraintMode::P2;

    double get(Norm n) const
    {
        switch (n) {
        case Norm::LinfH2: return e_LinfH2;
        case Norm::H1L2: return e_H1L2;
        case Norm::LinfH1: return e_LinfH1;
        case Norm::LinfL2: return e_LinfL2;
        }
        return std::numeric_limits<double>::quiet_NaN();
    }
};

/// |z(t)|_{H^2}^2, from the flow's closed form when present.
inline double exact_h2_seminorm_sq(const AnalyticFlow& flow, double t)
{
    if (flow.h2_seminorm_sq)
        return flow.h2_seminorm_sq(t);
    return integrate_adaptive(
        [&](double x) {
            const Vec v = flow.z_xx(x, t);
            return detail::dot(v, v);
        },
        flow.a, flow.b, 1e-12);
}

/// |z(t) - Z|_{H^2} via |z|^2 + |Z|^2 - 2 (I_{h,3} z, Z)_{H^2}; the cross term is exact
/// because the Hermite interpolant is the H^2-orthogonal projection for this product.
/// Evaluated as (|z|^2 - |I z|^2) + |I z - Z|^2 so the Z-dependent part has no cancellation.
inline double h2_error(const AnalyticFlow& flow, double t, const CurveState& Z)
{
    const CurveState Iz = interp_hermite(flow.at(t), Z.mesh_ptr());
    CurveState diff = Iz;
    for (std::size_t i = 0; i < diff.coeffs().size(); ++i)
        diff.coeffs()[i] -= Z.coeffs()[i];
    const double interp = std::max(exact_h2_seminorm_sq(flow, t) - seminorm_sq(Iz, 2), 0.0);
    return std::sqrt(std::max(interp + seminorm_sq(diff, 2), 0.0));
}

/// (tau sum_n ||I_{h,3} z_t(t_n) - d_t Z^n||^2)^{1/2}; rates[k] is d_t Z^{k+1}.
inline double h1l2_error(const AnalyticFlow& flow, std::shared_ptr<const Dissection> mesh,
                         std::span<const Vec> rates, double tau)
{
    const SymBandMatrix mass = mass_matrix(*mesh, flow.dim);
    double sum = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) {
        const double t = static_cast<double>(k + 1) * tau;
        Vec e = interp_hermite(flow.velocity_at(t), mesh).coeffs();
        for (std::size_t i = 0; i < e.size(); ++i)
            e[i] -= rates[k][i];
        sum += mass.quad_form(e);
    }
    return std::sqrt(tau * sum);
}

/// (max_n ||I_{h,3} z(t_n) - Z^n||, max_n |I_{h,3} z(t_n) - Z^n|_{H^1}); trajectory[n] is Z^n.
inline std::pair<double, double> weak_errors(const AnalyticFlow& flow,
                                             std::span<const CurveState> trajectory, double tau)
{
    double l2 = 0.0, h1 = 0.0;
    for (std::size_t n = 0; n < trajectory.size(); ++n) {
        const CurveState& Z = trajectory[n];
        CurveState e = interp_hermite(flow.at(static_cast<double>(n) * tau), Z.mesh_ptr());
        for (std::size_t i = 0; i < e.coeffs().size(); ++i)
            e.coeffs()[i] -= Z.coeffs()[i];
        l2 = std::max(l2, std::sqrt(seminorm_sq(e, 0)));
        h1 = std::max(h1, std::sqrt(seminorm_sq(e, 1)));
    }
    return {l2, h1};
}

/// Streaming version of the three error functions, fed once per time level.
class ErrorAccumulator {
public:
    ErrorAccumulator(const AnalyticFlow& flow, std::shared_ptr<const Dissection> mesh, double tau)
        : flow_(flow), mesh_(std::move(mesh)), tau_(tau),
          mass_(mass_matrix(*mesh_, flow.dim)), h1_(h1_stiffness_matrix(*mesh_, flow.dim)),
          stiff_(stiffness_matrix(*mesh_, flow.dim))
    {
    }

    /// Z^n at t_n; rate is d_t Z^n (empty for n = 0).
    void observe(std::size_t n, const CurveState& Z, std::span<const double> rate)
    {
        const double t = static_cast<double>(n) * tau_;
        const Vec Iz = interp_hermite(flow_.at(t), mesh_).coeffs();
        const Vec& z = Z.coeffs();
        Vec e(z.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            e[i] = Iz[i] - z[i];

        // same grouping as h2_error
        const double interp = std::max(exact_h2_seminorm_sq(flow_, t) - stiff_.quad_form(Iz), 0.0);
        linf_h2_ = std::max(linf_h2_, std::sqrt(interp + std::max(stiff_.quad_form(e), 0.0)));
        linf_l2_ = std::max(linf_l2_, std::sqrt(std::max(mass_.quad_form(e), 0.0)));
        linf_h1_ = std::max(linf_h1_, std::sqrt(std::max(h1_.quad_form(e), 0.0)));

        if (!rate.empty()) {
            Vec et = flow_.stationary ? Vec(z.size(), 0.0)
                                      : interp_hermite(flow_.velocity_at(t), mesh_).coeffs();
            for (std::size_t i = 0; i < et.size(); ++i)
                et[i] -= rate[i];
            h1l2_sum_ += mass_.quad_form(et);
        }
    }

    ErrorReport report(ConstraintMode mode) const
    {
        ErrorReport r;
        r.e_LinfH2 = linf_h2_;
        r.e_H1L2 = std::sqrt(tau_ * h1l2_sum_);
        r.e_LinfH1 = linf_h1_;
        r.e_LinfL2 = linf_l2_;
        r.h = mesh_->h_max();
        r.tau = tau_;
        r.elements = mesh_->elements();
        r.mode = mode;
        return r;
    }

private:
    const AnalyticFlow& flow_;
    std::shared_ptr<const Dissection> mesh_;
    double tau_;
    SymBandMatrix mass_, h1_, stiff_;
    double linf_h2_ = 0.0, linf_l2_ = 0.0, linf_h1_ = 0.0, h1l2_sum_ = 0.0;
};

/// Runs cfg and measures all four error quantities against cfg.initial as exact solution.
inline ErrorReport measure_errors(const FlowConfig& cfg)
{
    ErrorAccumulator acc(cfg.initial, cfg.mesh, cfg.tau);
    FlowConfig quiet = cfg;
    quiet.snapshot_stride = std::max<std::size_t>(cfg.steps(), 1);
    quiet.keep_trajectory = false;
    const CurveState Z0 = init_state(quiet);
    acc.observe(0, Z0, {});
    run(quiet, [&](std::size_t n, const CurveState& Z, std::span<const double> rate) {
        acc.observe(n, Z, rate);
    });
    return acc.report(cfg.mode);
}

// ---------------------------------------------------------------------------
// Convergence studies

/// Experimental orders between consecutive levels; entry 0 is NaN.
inline std::vector<double> eoc(std::span<const double> h, std::span<const double> err)
{
    std::vector<double> out(err.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double ratio = err[i - 1] / err[i];
        if (std::abs(h[i - 1] - 2.0 * h[i]) <= 1e-12 * h[i - 1])
            out[i] = std::log2(ratio);
        else
            out[i] = std::log(ratio) / std::log(h[i - 1] / h[i]);
    }
    return out;
}

struct StudySpec {
    AnalyticFlow flow;
    BoundarySpec bc;
    bool forced = false;
    double T = 1.0;
    std::vector<std::size_t> levels;   // element counts M, increasing
    std::vector<double> taus;
    std::vector<ConstraintMode> modes;
    bool parallel = true;
};

struct ConvergenceColumn {
    ConstraintMode mode = ConstraintMode::P2;
    double tau = 0.0;
    std::vector<ErrorReport> runs; // one per level
    std::vector<bool> ok;
};

struct ConvergenceTable {
    std::vector<std::size_t> levels;
    std::vector<double> h;
    std::vector<ConvergenceColumn> columns; // ordered mode-major, then tau
    std::vector<std::string> failures;

    bool complete() const noexcept { return failures.empty(); }

    const ConvergenceColumn& column(ConstraintMode mode, double tau) const
    {
        for (const auto& c : columns)
            if (c.mode == mode && c.tau == tau)
                return c;
        throw std::out_of_range("ConvergenceTable: no column for the requested mode/tau");
    }

    std::vector<double> errors(Norm norm, ConstraintMode mode, double tau) const
    {
        const auto& c = column(mode, tau);
        std::vector<double> e;
        for (std::size_t i = 0; i < c.runs.size(); ++i)
            e.push_back(c.ok[i] ? c.runs[i].get(norm) : std::numeric_limits<double>::quiet_NaN());
        return e;
    }

    std::vector<double> rates(Norm norm, ConstraintMode mode, double tau) const
    {
        const auto e = errors(norm, mode, tau);
        return eoc(h, e);
    }
};

inline std::string tau_label(double tau)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", tau);
    return buf;
}

/// `h,err_<norm>_<mode>_<tau>,eoc_<norm>_<mode>_<tau>,...`; the first eoc entry is empty.
inline void write_table_csv(std::ostream& os, const ConvergenceTable& table, Norm norm)
{
    os << "h";
    for (const auto& c : table.columns) {
        const std::string key = std::string(to_string(norm)) + "_" + to_string(c.mode) + "_" + tau_label(c.tau);
        os << ",err_" << key << ",eoc_" << key;
    }
    os << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < table.h.size(); ++i) {
        os << table.h[i];
        for (const auto& c : table.columns) {
            const auto e = table.errors(norm, c.mode, c.tau);
            const auto r = eoc(table.h, e);
            os << ',';
            if (std::isfinite(e[i])) os << e[i];
            os << ',';
            if (std::isfinite(r[i])) os << r[i];
        }
        os << '\n';
    }
}

/// Runs every (level, mode, tau) combination and tabulates the errors. A failed run is
/// recorded in `failures` and leaves NaN entries; other runs still complete.
inline ConvergenceTable convergence_study(const StudySpec& spec)
{
    if (spec.levels.size() < 2)
        throw std::invalid_argument("convergence_study: need at least two mesh levels");
    if (spec.taus.empty() || spec.modes.empty())
        throw std::invalid_argument("convergence_study: need at least one tau and one mode");

    ConvergenceTable table;
    table.levels = spec.levels;
    std::vector<std::shared_ptr<const Dissection>> meshes;
    for (std::size_t M : spec.levels) {
        meshes.push_back(std::make_shared<const Dissection>(Dissection::uniform(spec.flow.a, spec.flow.b, M)));
        table.h.push_back(meshes.back()->h_max());
    }

    struct Job {
        std::size_t column, level;
        FlowConfig cfg;
    };
    std::vector<Job> jobs;
    for (ConstraintMode mode : spec.modes)
        for (double tau : spec.taus) {
            ConvergenceColumn col;
            col.mode = mode;
            col.tau = tau;
            col.runs.resize(spec.levels.size());
            col.ok.assign(spec.levels.size(), false);
            table.columns.push_back(std::move(col));
            for (std::size_t l = 0; l < spec.levels.size(); ++l) {
                FlowConfig cfg;
                cfg.mesh = meshes[l];
                cfg.tau = tau;
                cfg.T = spec.T;
                cfg.mode = mode;
                cfg.bc = spec.bc;
                cfg.initial = spec.flow;
                cfg.forced = spec.forced;
                jobs.push_back({table.columns.size() - 1, l, std::move(cfg)});
            }
        }

    auto execute = [](const FlowConfig& cfg) { return measure_errors(cfg); };
    std::vector<std::future<ErrorReport>> futures;
    for (const auto& job : jobs)
        futures.push_back(std::async(spec.parallel ? std::launch::async : std::launch::deferred,
                                     execute, std::cref(job.cfg)));
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        auto& col = table.columns[jobs[k].column];
        try {
            col.runs[jobs[k].level] = futures[k].get();
            col.ok[jobs[k].level] = true;
        } catch (const std::exception& ex) {
            table.failures.push_back(std::string(to_string(col.mode)) + " tau=" + tau_label(col.tau) +
                                     " M=" + std::to_string(spec.levels[jobs[k].level]) + ": " + ex.what());
        }
    }
    return table;
}

} // namespace eflow
