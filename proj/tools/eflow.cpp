// Command-line driver: single runs, convergence studies, and the flow registry.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eflow/eflow.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_numeric = 2;

eflow::ExperimentConfig load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw eflow::ConfigError("cannot open config file '" + path + "'");
    auto cfg = eflow::parse_config(in);
    if (const char* dir = std::getenv("EFLOW_OUTPUT_DIR"); dir && *dir)
        cfg.output_dir = dir;
    return cfg;
}

std::ofstream open_out(const fs::path& p)
{
    std::ofstream os(p);
    if (!os)
        throw eflow::ConfigError("cannot write '" + p.string() + "'");
    return os;
}

int cmd_run(const std::string& path)
{
    const auto cfg = load(path);
    if (cfg.levels.size() != 1 || cfg.taus.size() != 1 || cfg.modes.size() != 1)
        throw eflow::ConfigError("run expects exactly one value for elements, tau and mode");
    const eflow::FlowConfig flow = cfg.flow_config();
    fs::create_directories(cfg.output_dir);

    const eflow::RunResult res = eflow::run(flow);

    auto reports = open_out(fs::path(cfg.output_dir) / "reports.csv");
    eflow::write_reports_csv(reports, res.reports);
    for (const auto& snap : res.snapshots) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%06zu.csv", snap.n);
        auto os = open_out(fs::path(cfg.output_dir) / name);
        eflow::write_snapshot_csv(os, snap.state, cfg.samples_per_element);
    }

    double worst = 0.0;
    std::size_t zero_rows = 0;
    for (const auto& r : res.reports) {
        worst = std::max(worst, r.constraint_violation);
        zero_rows += r.zero_rows;
    }
    std::printf("flow %s, %s constraint, M = %zu, tau = %g, %zu steps\n", cfg.flow.c_str(),
                eflow::to_string(flow.mode), flow.mesh->elements(), flow.tau, res.reports.size());
    std::printf("initial energy        %.17g\n", eflow::bending_energy(res.initial));
    std::printf("final energy          %.17g\n", res.reports.empty() ? 0.0 : res.reports.back().energy);
    std::printf("max constraint viol.  %.17g\n", worst);
    if (zero_rows > 0)
        std::printf("warning: %zu degenerate constraint rows (|Z_x| = 0) were left out\n", zero_rows);
    std::printf("output written to %s\n", cfg.output_dir.c_str());
    return exit_ok;
}

int cmd_convergence(const std::string& path)
{
    const auto cfg = load(path);
    if (cfg.levels.size() < 2)
        throw eflow::ConfigError("convergence needs at least two mesh levels in discretization.elements");
    fs::create_directories(cfg.output_dir);

    const eflow::ConvergenceTable table = eflow::convergence_study(cfg.study_spec());
    for (eflow::Norm norm : cfg.norms) {
        auto os = open_out(fs::path(cfg.output_dir) / (std::string("table_") + eflow::to_string(norm) + ".csv"));
        eflow::write_table_csv(os, table, norm);
    }

    std::printf("flow %s, levels:", cfg.flow.c_str());
    for (std::size_t M : cfg.levels)
        std::printf(" %zu", M);
    std::printf("\n");
    for (eflow::Norm norm : cfg.norms)
        for (const auto& col : table.columns) {
            const auto e = table.errors(norm, col.mode, col.tau);
            const auto r = table.rates(norm, col.mode, col.tau);
            std::printf("%-7s %s tau=%-8g err:", eflow::to_string(norm), eflow::to_string(col.mode), col.tau);
            for (double v : e)
                std::printf(" %10.3e", v);
            std::printf("  eoc:");
            for (std::size_t i = 1; i < r.size(); ++i)
                std::printf(" %6.2f", r[i]);
            std::printf("\n");
        }
    for (const auto& f : table.failures)
        std::fprintf(stderr, "failed run: %s\n", f.c_str());
    std::printf("tables written to %s\n", cfg.output_dir.c_str());
    return table.complete() ? exit_ok : exit_numeric;
}

int cmd_flows()
{
    for (const auto& [name, entry] : eflow::flow_registry())
        std::printf("%-14s %s\n", name.c_str(), entry.description.c_str());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Elastic flow of inextensible curves (cubic C1 Hermite elements)"};
    app.require_subcommand(1);
    std::string run_cfg, conv_cfg;
    auto* run = app.add_subcommand("run", "run a single flow and write reports.csv and snapshots");
    run->add_option("config", run_cfg, "experiment config file")->required();
    auto* conv = app.add_subcommand("convergence", "run a mesh-refinement study and write EOC tables");
    conv->add_option("config", conv_cfg, "experiment config file")->required();
    auto* flows = app.add_subcommand("flows", "list the registered analytic flows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*run) return cmd_run(run_cfg);
        if (*conv) return cmd_convergence(conv_cfg);
        if (*flows) return cmd_flows();
    } catch (const eflow::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const eflow::SolverError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return exit_numeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return exit_numeric;
    }
    return exit_ok;
}
