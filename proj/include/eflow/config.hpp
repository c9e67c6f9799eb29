#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <optional>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "eflow/analysis.hpp"
#include "eflow/assembly.hpp"
#include "eflow/flow.hpp"
#include "eflow/forcing.hpp"

namespace eflow {

/// Thrown for unreadable or invalid experiment files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Experiment description read from an INI-style file:
///
///   [experiment]  flow, T, output_dir, snapshot_stride, samples_per_element
///   [boundary]    value = none|a|b|both, slope = none|a|b|both, periodic = true|false
///   [discretization]  mode, elements, tau   (comma-separated lists)
///   [study]       norms (comma-separated), parallel
///
/// Lines starting with ';' are comments.
struct ExperimentConfig {
    std::string flow = "circle";
    BoundarySpec bc;
    std::vector<ConstraintMode> modes{ConstraintMode::P2};
    std::vector<std::size_t> levels{16};
    std::vector<double> taus{0.1};
    double T = 1.0;
    std::string output_dir = "out";
    std::size_t snapshot_stride = 10;
    std::size_t samples_per_element = 10;
    std::vector<Norm> norms{Norm::LinfH2, Norm::H1L2, Norm::LinfH1, Norm::LinfL2};
    bool parallel = true;

    bool operator==(const ExperimentConfig&) const = default;

    void validate() const
    {
        if (!flow_registry().contains(flow))
            throw ConfigError("unknown flow '" + flow + "'");
        try {
            bc.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (modes.empty() || levels.empty() || taus.empty() || norms.empty())
            throw ConfigError("mode, elements, tau and norms must each list at least one value");
        for (std::size_t M : levels)
            if (M == 0)
                throw ConfigError("element counts must be positive");
        for (double tau : taus) {
            if (!(tau > 0.0))
                throw ConfigError("time steps must be positive");
            const double n = std::round(T / tau);
            if (!(T >= tau) || std::abs(n * tau - T) > 1e-12 * std::max(1.0, T))
                throw ConfigError("T = " + std::to_string(T) + " is not a multiple of tau = " +
                                  std::to_string(tau));
        }
        if (snapshot_stride == 0 || samples_per_element == 0)
            throw ConfigError("snapshot_stride and samples_per_element must be positive");
    }

    bool forced() const { return flow_registry().at(flow).forced; }

    /// Flow configuration for one (level, tau, mode) choice.
    FlowConfig flow_config(std::size_t level_index = 0, std::size_t tau_index = 0,
                           std::size_t mode_index = 0) const
    {
        FlowConfig cfg;
        cfg.initial = make_flow(flow);
        cfg.mesh = std::make_shared<const Dissection>(
            Dissection::uniform(cfg.initial.a, cfg.initial.b, levels.at(level_index)));
        cfg.tau = taus.at(tau_index);
        cfg.T = T;
        cfg.mode = modes.at(mode_index);
        cfg.bc = bc;
        cfg.forced = forced();
        cfg.snapshot_stride = snapshot_stride;
        return cfg;
    }

    StudySpec study_spec() const
    {
        StudySpec s;
        s.flow = make_flow(flow);
        s.bc = bc;
        s.forced = forced();
        s.T = T;
        s.levels = levels;
        s.taus = taus;
        s.modes = modes;
        s.parallel = parallel;
        return s;
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos)
            out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

inline std::pair<bool, bool> parse_ends(const std::string& s, const std::string& key)
{
    if (s == "none") return {false, false};
    if (s == "a") return {true, false};
    if (s == "b") return {false, true};
    if (s == "both") return {true, true};
    throw ConfigError("boundary." + key + " must be none, a, b or both (got '" + s + "')");
}

inline std::string ends_string(bool a, bool b)
{
    return a ? (b ? "both" : "a") : (b ? "b" : "none");
}

inline bool parse_bool(const std::string& s, const std::string& key)
{
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + " must be true or false (got '" + s + "')");
}

template <class T>
T parse_number(const std::string& s, const std::string& key)
{
    std::istringstream is(s);
    T v{};
    is >> v;
    if (!is || !is.eof())
        throw ConfigError(key + ": cannot parse '" + s + "'");
    return v;
}

inline std::string format_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace detail

inline ExperimentConfig parse_config(std::istream& in)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax error: ") + e.what());
    }

    static const std::vector<std::pair<std::string, std::vector<std::string>>> schema{
        {"experiment", {"flow", "T", "output_dir", "snapshot_stride", "samples_per_element"}},
        {"boundary", {"value", "slope", "periodic"}},
        {"discretization", {"mode", "elements", "tau"}},
        {"study", {"norms", "parallel"}},
    };
    for (const auto& [section, body] : tree) {
        auto it = std::find_if(schema.begin(), schema.end(), [&](const auto& s) { return s.first == section; });
        if (it == schema.end())
            throw ConfigError("unknown section [" + section + "]");
        for (const auto& [key, _] : body)
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    }

    ExperimentConfig c;
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.')))
            return *v;
        return std::nullopt;
    };
    using detail::parse_number;
    if (auto v = get("experiment.flow")) c.flow = *v;
    if (auto v = get("experiment.T")) c.T = parse_number<double>(*v, "experiment.T");
    if (auto v = get("experiment.output_dir")) c.output_dir = *v;
    if (auto v = get("experiment.snapshot_stride"))
        c.snapshot_stride = parse_number<std::size_t>(*v, "experiment.snapshot_stride");
    if (auto v = get("experiment.samples_per_element"))
        c.samples_per_element = parse_number<std::size_t>(*v, "experiment.samples_per_element");

    if (auto v = get("boundary.value"))
        std::tie(c.bc.value_a, c.bc.value_b) = detail::parse_ends(*v, "value");
    if (auto v = get("boundary.slope"))
        std::tie(c.bc.slope_a, c.bc.slope_b) = detail::parse_ends(*v, "slope");
    if (auto v = get("boundary.periodic")) c.bc.periodic = detail::parse_bool(*v, "boundary.periodic");

    try {
        if (auto v = get("discretization.mode")) {
            c.modes.clear();
            for (const auto& s : detail::split_list(*v))
                c.modes.push_back(parse_mode(s));
        }
        if (auto v = get("study.norms")) {
            c.norms.clear();
            for (const auto& s : detail::split_list(*v))
                c.norms.push_back(parse_norm(s));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (auto v = get("discretization.elements")) {
        c.levels.clear();
        for (const auto& s : detail::split_list(*v))
            c.levels.push_back(parse_number<std::size_t>(s, "discretization.elements"));
    }
    if (auto v = get("discretization.tau")) {
        c.taus.clear();
        for (const auto& s : detail::split_list(*v))
            c.taus.push_back(parse_number<double>(s, "discretization.tau"));
    }
    if (auto v = get("study.parallel")) c.parallel = detail::parse_bool(*v, "study.parallel");

    c.validate();
    return c;
}

inline ExperimentConfig parse_config_string(const std::string& text)
{
    std::istringstream is(text);
    return parse_config(is);
}

inline void write_config(std::ostream& os, const ExperimentConfig& c)
{
    auto join = [](const auto& items, auto fmt) {
        std::string s;
        for (const auto& x : items) {
            if (!s.empty()) s += ",";
            s += fmt(x);
        }
        return s;
    };
    os << "[experiment]\n"
       << "flow = " << c.flow << '\n'
       << "T = " << detail::format_double(c.T) << '\n'
       << "output_dir = " << c.output_dir << '\n'
       << "snapshot_stride = " << c.snapshot_stride << '\n'
       << "samples_per_element = " << c.samples_per_element << "\n\n"
       << "[boundary]\n"
       << "value = " << detail::ends_string(c.bc.value_a, c.bc.value_b) << '\n'
       << "slope = " << detail::ends_string(c.bc.slope_a, c.bc.slope_b) << '\n'
       << "periodic = " << (c.bc.periodic ? "true" : "false") << "\n\n"
       << "[discretization]\n"
       << "mode = " << join(c.modes, [](ConstraintMode m) { return std::string(to_string(m)); }) << '\n'
       << "elements = " << join(c.levels, [](std::size_t m) { return std::to_string(m); }) << '\n'
       << "tau = " << join(c.taus, [](double t) { return detail::format_double(t); }) << "\n\n"
       << "[study]\n"
       << "norms = " << join(c.norms, [](Norm n) { return std::string(to_string(n)); }) << '\n'
       << "parallel = " << (c.parallel ? "true" : "false") << '\n';
}

} // namespace eflow
