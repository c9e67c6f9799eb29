#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace eflow;
namespace fs = std::filesystem;

namespace {

const std::string full_config = R"(; comment line
[experiment]
flow = helix
T = 0.5
output_dir = somewhere/else
snapshot_stride = 7
samples_per_element = 3

[boundary]
value = both
slope = both
periodic = false

[discretization]
mode = P1, P2
elements = 8,16, 32
tau = 0.1, 0.05

[study]
norms = LinfH2,H1L2
parallel = false
)";

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("eflow_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_file(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
    return p;
}

int cli(const std::string& args, const fs::path& out = {})
{
    std::string cmd;
    if (!out.empty())
        cmd = "EFLOW_OUTPUT_DIR='" + out.string() + "' ";
    cmd += std::string("'") + EFLOW_CLI_PATH + "' " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig bundled(const std::string& name)
{
    std::ifstream in(fs::path(EFLOW_CONFIG_DIR) / name);
    return parse_config(in);
}

} // namespace

TEST(Config, ParsesAllSections)
{
    const auto c = parse_config_string(full_config);
    EXPECT_EQ(c.flow, "helix");
    EXPECT_EQ(c.T, 0.5);
    EXPECT_EQ(c.bc, BoundarySpec::clamped());
    EXPECT_EQ(c.modes, (std::vector<ConstraintMode>{ConstraintMode::P1, ConstraintMode::P2}));
    EXPECT_EQ(c.levels, (std::vector<std::size_t>{8, 16, 32}));
    EXPECT_EQ(c.taus, (std::vector<double>{0.1, 0.05}));
    EXPECT_EQ(c.norms, (std::vector<Norm>{Norm::LinfH2, Norm::H1L2}));
    EXPECT_FALSE(c.parallel);
    EXPECT_EQ(c.snapshot_stride, 7u);
    const auto spec = c.study_spec();
    EXPECT_EQ(spec.levels.size(), 3u);
    const auto fc = c.flow_config(1, 1, 0);
    EXPECT_EQ(fc.mesh->elements(), 16u);
    EXPECT_EQ(fc.tau, 0.05);
    EXPECT_EQ(fc.mode, ConstraintMode::P1);
}

TEST(Config, RoundTrip)
{
    const auto c = parse_config_string(full_config);
    std::ostringstream os;
    write_config(os, c);
    const auto again = parse_config_string(os.str());
    EXPECT_EQ(again, c);
    std::ostringstream os2;
    write_config(os2, again);
    EXPECT_EQ(os2.str(), os.str());

    ExperimentConfig odd;
    odd.taus = {1.0 / 3.0};
    odd.T = 1.0;
    odd.bc = BoundarySpec::periodic_ends();
    std::ostringstream os3;
    write_config(os3, odd);
    EXPECT_EQ(parse_config_string(os3.str()), odd);
}

TEST(Config, RejectsBadInput)
{
    auto with = [](const std::string& from, const std::string& to) {
        std::string s = full_config;
        s.replace(s.find(from), from.size(), to);
        return s;
    };
    EXPECT_THROW(parse_config_string(with("flow = helix", "flow = spiral")), ConfigError);
    EXPECT_THROW(parse_config_string(with("flow = helix", "flow = helix\ncolour = red")), ConfigError);
    EXPECT_THROW(parse_config_string(with("[study]", "[plotting]")), ConfigError);
    EXPECT_THROW(parse_config_string(with("value = both", "value = middle")), ConfigError);
    EXPECT_THROW(parse_config_string(with("periodic = false", "periodic = maybe")), ConfigError);
    EXPECT_THROW(parse_config_string(with("periodic = false", "periodic = true")), ConfigError);
    EXPECT_THROW(parse_config_string(with("mode = P1, P2", "mode = P3")), ConfigError);
    EXPECT_THROW(parse_config_string(with("elements = 8,16, 32", "elements = 8, x")), ConfigError);
    EXPECT_THROW(parse_config_string(with("elements = 8,16, 32", "elements = 0")), ConfigError);
    EXPECT_THROW(parse_config_string(with("tau = 0.1, 0.05", "tau = 0.3")), ConfigError);
    EXPECT_THROW(parse_config_string(with("tau = 0.1, 0.05", "tau = -0.1")), ConfigError);
    EXPECT_THROW(parse_config_string(with("norms = LinfH2,H1L2", "norms = H3")), ConfigError);
    EXPECT_THROW(parse_config_string(with("T = 0.5", "T = 0.5s")), ConfigError);
    EXPECT_THROW(parse_config_string("[experiment\nflow = circle\n"), ConfigError);
}

TEST(Config, BundledConfigsAreValid)
{
    for (const auto& entry : fs::directory_iterator(EFLOW_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg")
            continue;
        std::ifstream in(entry.path());
        EXPECT_NO_THROW(parse_config(in)) << entry.path();
    }
}

TEST(BundledRuns, CircleKeepsConstraint)
{
    const auto c = bundled("circle.cfg");
    EXPECT_EQ(c.levels, (std::vector<std::size_t>{64}));
    EXPECT_EQ(c.bc, BoundarySpec::semi_clamped());
    const auto res = run(c.flow_config());
    ASSERT_EQ(res.reports.size(), 500u);
    EXPECT_LE(res.reports.back().constraint_violation, 1e-8);
}

TEST(BundledRuns, HelixEnergyIsConstant)
{
    const auto res = run(bundled("helix.cfg").flow_config());
    const double E0 = bending_energy(res.initial);
    for (const auto& r : res.reports)
        EXPECT_NEAR(r.energy, E0, 1e-8 * E0);
}

TEST(BundledRuns, ForcedHelixTracksBoundaryData)
{
    const auto c = bundled("forced_helix.cfg");
    const auto fc = c.flow_config();
    const auto res = run(fc);
    const auto& flow = fc.initial;
    const std::size_t last = res.final_state.mesh().node_count() - 1;
    for (std::size_t j = 0; j < 3; ++j) {
        const double offset_b = res.initial.value(last, j) - flow.z(flow.b, 0.0)[j];
        EXPECT_NEAR(res.final_state.value(0, j), flow.z(flow.a, c.T)[j], 1e-9);
        EXPECT_NEAR(res.final_state.value(last, j) - offset_b, flow.z(flow.b, c.T)[j], 1e-9);
        EXPECT_NEAR(res.final_state.slope(last, j), flow.z_x(flow.b, c.T)[j], 1e-9);
    }
}

TEST(Cli, ExitCodes)
{
    const auto dir = scratch("exit");
    const std::string single = "[experiment]\nflow = circle\nT = 0.2\n[boundary]\nvalue = a\nslope = both\n"
                               "[discretization]\nelements = 8\ntau = 0.1\n";
    const auto ok = write_file(dir / "ok.cfg", single);
    EXPECT_EQ(cli("flows"), 0);
    EXPECT_EQ(cli("run '" + ok.string() + "'", dir / "out"), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "reports.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "snapshot_000000.csv"));
    EXPECT_TRUE(fs::exists(dir / "out" / "snapshot_000002.csv"));
    // single level is a usage error for a study
    EXPECT_EQ(cli("convergence '" + ok.string() + "'", dir / "out"), 1);
    EXPECT_EQ(cli("run '" + (dir / "missing.cfg").string() + "'"), 1);
    EXPECT_EQ(cli("run '" + write_file(dir / "bad.cfg", "[experiment]\nflow = nope\n").string() + "'"), 1);
    EXPECT_EQ(cli("frobnicate"), 1);

    const auto singular = write_file(dir / "singular.cfg",
                                     "[experiment]\nflow = helix\nT = 0.1\n[boundary]\nvalue = both\nslope = both\n"
                                     "[discretization]\nelements = 1\ntau = 0.1\n");
    EXPECT_EQ(cli("run '" + singular.string() + "'", dir / "out"), 2);
}

TEST(Cli, DeterministicOutput)
{
    const auto dir = scratch("determinism");
    const auto cfg = write_file(dir / "study.cfg",
                                "[experiment]\nflow = circle\nT = 0.5\n[boundary]\nvalue = a\nslope = both\n"
                                "[discretization]\nmode = P1,P2\nelements = 4,8\ntau = 0.1\n");
    ASSERT_EQ(cli("convergence '" + cfg.string() + "'", dir / "a"), 0);
    ASSERT_EQ(cli("convergence '" + cfg.string() + "'", dir / "b"), 0);
    for (const char* name : {"table_LinfH2.csv", "table_H1L2.csv", "table_LinfH1.csv", "table_LinfL2.csv"}) {
        const auto a = slurp(dir / "a" / name);
        EXPECT_FALSE(a.empty()) << name;
        EXPECT_EQ(a, slurp(dir / "b" / name)) << name;
    }
    const auto one = write_file(dir / "one.cfg",
                                "[experiment]\nflow = forced_helix\nT = 0.05\nsnapshot_stride = 2\n"
                                "[boundary]\nvalue = both\nslope = both\n[discretization]\nelements = 6\ntau = 0.01\n");
    ASSERT_EQ(cli("run '" + one.string() + "'", dir / "c"), 0);
    ASSERT_EQ(cli("run '" + one.string() + "'", dir / "d"), 0);
    for (const char* name : {"reports.csv", "snapshot_000004.csv", "snapshot_000005.csv"})
        EXPECT_EQ(slurp(dir / "c" / name), slurp(dir / "d" / name)) << name;
}
