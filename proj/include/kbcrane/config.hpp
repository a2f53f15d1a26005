#pragma once

// Scenario configuration files: INI-style sections mirroring ScenarioConfig.
//
//   [scenario]  preset (1..5, optional base), name, controller (pd|lqr), dt, t_final, rng_seed
//   [setpoint]  alpha_d, beta_d, gamma_d (rad), d_d (m)
//   [plant]     m_b, m_j, m, l_b, l_j, I_tot, I_b, I_j, g
//   [nominal]   same keys as [plant]
//   [gains]     kp_alpha .. kd_d
//   [lqr]       q (12 comma-separated values), r (4 values)
//   [initial]   q (6 values), qdot (6 values)
//   [noise]     sigma_angles (rad), sigma_d (m), seed
//   [gust0], [gust1], ...  t_start, duration, force (3 values, N)
//
// Keys that are not given keep the preset value (or the built-in default).
// Sections [run], [metrics] and [metrics_lqr] are written into manifests and ignored on input,
// so a manifest can be fed back as a configuration.

#include "kbcrane/csv.hpp"
#include "kbcrane/simulation.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbcrane {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using boost::property_tree::ptree;

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string &key, const std::string &raw) {
    const std::string text = trim(raw);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError("'" + key + "': expected a number, got '" + raw + "'");
    return v;
}

inline std::uint64_t to_uint(const std::string &key, const std::string &raw) {
    const std::string text = trim(raw);
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError("'" + key + "': expected a non-negative integer, got '" + raw + "'");
    return v;
}

inline std::vector<double> to_list(const std::string &key, const std::string &raw,
                                   std::size_t expected) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    if (out.size() != expected)
        throw ConfigError("'" + key + "': expected " + std::to_string(expected) +
                          " comma-separated values, got " + std::to_string(out.size()));
    return out;
}

inline std::string join(const double *v, std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
}

/// Reads the keys of one section into doubles, rejecting unknown keys.
class SectionReader {
public:
    SectionReader(const ptree &section, std::string name)
        : section_(section), name_(std::move(name)) {}

    void number(const char *key, double &target) {
        known_.insert(key);
        if (auto v = section_.get_optional<std::string>(ptree::path_type(key, '\0')))
            target = to_double(qualified(key), *v);
    }
    void integer(const char *key, std::uint64_t &target) {
        known_.insert(key);
        if (auto v = section_.get_optional<std::string>(ptree::path_type(key, '\0')))
            target = to_uint(qualified(key), *v);
    }
    template <typename Vec> void list(const char *key, Vec &target) {
        known_.insert(key);
        if (auto v = section_.get_optional<std::string>(ptree::path_type(key, '\0'))) {
            const auto values = to_list(qualified(key), *v, static_cast<std::size_t>(target.size()));
            for (std::size_t i = 0; i < values.size(); ++i) target[static_cast<Eigen::Index>(i)] = values[i];
        }
    }
    std::optional<std::string> text(const char *key) {
        known_.insert(key);
        if (auto v = section_.get_optional<std::string>(ptree::path_type(key, '\0'))) return trim(*v);
        return std::nullopt;
    }
    void finish() const {
        for (const auto &[key, _] : section_)
            if (!known_.count(key)) throw ConfigError("unknown key '" + qualified(key) + "'");
    }

private:
    std::string qualified(const std::string &key) const { return name_ + "." + key; }

    const ptree &section_;
    std::string name_;
    std::set<std::string> known_;
};

inline void read_params(SectionReader &r, CraneParams &p) {
    r.number("m_b", p.m_b);
    r.number("m_j", p.m_j);
    r.number("m", p.m);
    r.number("l_b", p.l_b);
    r.number("l_j", p.l_j);
    r.number("I_tot", p.I_tot);
    r.number("I_b", p.I_b);
    r.number("I_j", p.I_j);
    r.number("g", p.g);
    r.finish();
}

inline void write_params(std::ostream &os, const char *section, const CraneParams &p) {
    os << '[' << section << "]\n"
       << "m_b = " << format_double(p.m_b) << '\n'
       << "m_j = " << format_double(p.m_j) << '\n'
       << "m = " << format_double(p.m) << '\n'
       << "l_b = " << format_double(p.l_b) << '\n'
       << "l_j = " << format_double(p.l_j) << '\n'
       << "I_tot = " << format_double(p.I_tot) << '\n'
       << "I_b = " << format_double(p.I_b) << '\n'
       << "I_j = " << format_double(p.I_j) << '\n'
       << "g = " << format_double(p.g) << "\n\n";
}

inline bool is_gust_section(const std::string &name) {
    if (name.rfind("gust", 0) != 0 || name.size() == 4) return false;
    for (std::size_t i = 4; i < name.size(); ++i)
        if (name[i] < '0' || name[i] > '9') return false;
    return true;
}

} // namespace detail

inline ControllerKind parse_controller(const std::string &text) {
    if (text == "pd") return ControllerKind::PdGravity;
    if (text == "lqr") return ControllerKind::Lqr;
    throw ConfigError("controller must be 'pd' or 'lqr' (got '" + text + "')");
}

/// Parses a configuration. Semantic validation (positive masses, admissible
/// initial state, ...) is done as well and reported as ConfigError.
inline ScenarioConfig parse_config(std::istream &is) {
    using detail::ptree;
    ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    for (const auto &[key, node] : tree)
        if (node.empty() && !node.data().empty())
            throw ConfigError("key '" + key + "' must be inside a section");

    const ptree empty;
    auto section = [&](const char *name) -> const ptree & {
        const auto it = tree.find(name);
        return it == tree.not_found() ? empty : it->second;
    };

    ScenarioConfig cfg;
    cfg.initial_state.q << 0.0, 0.0, 0.0, 1.0, 0.0, 0.0;
    {
        detail::SectionReader r(section("scenario"), "scenario");
        if (auto preset = r.text("preset")) {
            const auto id = detail::to_uint("scenario.preset", *preset);
            if (id < 1 || id > 5) throw ConfigError("'scenario.preset' must be 1..5");
            cfg = scenario_preset(static_cast<int>(id));
        }
        if (auto name = r.text("name")) cfg.name = *name;
        if (auto controller = r.text("controller")) cfg.controller = parse_controller(*controller);
        r.number("dt", cfg.dt);
        r.number("t_final", cfg.t_final);
        r.integer("rng_seed", cfg.rng_seed);
        r.finish();
    }
    {
        detail::SectionReader r(section("setpoint"), "setpoint");
        r.number("alpha_d", cfg.setpoint.alpha_d);
        r.number("beta_d", cfg.setpoint.beta_d);
        r.number("gamma_d", cfg.setpoint.gamma_d);
        r.number("d_d", cfg.setpoint.d_d);
        r.finish();
    }
    {
        detail::SectionReader r(section("plant"), "plant");
        detail::read_params(r, cfg.plant_params);
    }
    {
        detail::SectionReader r(section("nominal"), "nominal");
        detail::read_params(r, cfg.nominal_params);
    }
    {
        detail::SectionReader r(section("gains"), "gains");
        auto &k = cfg.gains;
        r.number("kp_alpha", k.kp_alpha);
        r.number("kp_beta", k.kp_beta);
        r.number("kp_gamma", k.kp_gamma);
        r.number("kp_d", k.kp_d);
        r.number("kd_alpha", k.kd_alpha);
        r.number("kd_beta", k.kd_beta);
        r.number("kd_gamma", k.kd_gamma);
        r.number("kd_d", k.kd_d);
        r.finish();
    }
    if (tree.find("lqr") != tree.not_found()) {
        detail::SectionReader r(section("lqr"), "lqr");
        LqrWeights w = cfg.lqr_weights.value_or(LqrWeights{});
        r.list("q", w.q_diag);
        r.list("r", w.r_diag);
        r.finish();
        cfg.lqr_weights = w;
    }
    {
        detail::SectionReader r(section("initial"), "initial");
        r.list("q", cfg.initial_state.q);
        r.list("qdot", cfg.initial_state.qdot);
        r.finish();
    }
    if (tree.find("noise") != tree.not_found()) {
        detail::SectionReader r(section("noise"), "noise");
        NoiseSpec n = cfg.noise.value_or(NoiseSpec{});
        r.number("sigma_angles", n.sigma_angles);
        r.number("sigma_d", n.sigma_d);
        r.integer("seed", n.seed);
        r.finish();
        cfg.noise = n;
    }

    // Gust sections replace the preset's disturbance list when present.
    std::map<std::uint64_t, DisturbanceSpec> gusts;
    for (const auto &[name, node] : tree) {
        if (!detail::is_gust_section(name)) continue;
        const auto index = detail::to_uint(name, name.substr(4));
        DisturbanceSpec g;
        detail::SectionReader r(node, name);
        r.number("t_start", g.t_start);
        r.number("duration", g.duration);
        r.list("force", g.force_world);
        r.finish();
        gusts[index] = g;
    }
    if (!gusts.empty()) {
        cfg.disturbances.clear();
        for (const auto &[_, g] : gusts) cfg.disturbances.push_back(g);
    }

    static const std::set<std::string> known = {"scenario", "setpoint", "plant", "nominal",
                                                "gains",    "lqr",      "initial", "noise",
                                                "run",      "metrics", "metrics_lqr"};
    for (const auto &[name, _] : tree)
        if (!known.count(name) && !detail::is_gust_section(name))
            throw ConfigError("unknown section '[" + name + "]'");

    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline ScenarioConfig load_config(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open configuration file '" + path + "'");
    return parse_config(is);
}

/// Writes the fully resolved configuration. parse_config() of the output
/// reproduces cfg exactly.
inline void write_config(std::ostream &os, const ScenarioConfig &cfg) {
    os << "[scenario]\n"
       << "name = " << cfg.name << '\n'
       << "controller = " << to_string(cfg.controller) << '\n'
       << "dt = " << format_double(cfg.dt) << '\n'
       << "t_final = " << format_double(cfg.t_final) << '\n'
       << "rng_seed = " << cfg.rng_seed << "\n\n";
    os << "[setpoint]\n"
       << "alpha_d = " << format_double(cfg.setpoint.alpha_d) << '\n'
       << "beta_d = " << format_double(cfg.setpoint.beta_d) << '\n'
       << "gamma_d = " << format_double(cfg.setpoint.gamma_d) << '\n'
       << "d_d = " << format_double(cfg.setpoint.d_d) << "\n\n";
    detail::write_params(os, "plant", cfg.plant_params);
    detail::write_params(os, "nominal", cfg.nominal_params);
    const auto &k = cfg.gains;
    os << "[gains]\n"
       << "kp_alpha = " << format_double(k.kp_alpha) << '\n'
       << "kp_beta = " << format_double(k.kp_beta) << '\n'
       << "kp_gamma = " << format_double(k.kp_gamma) << '\n'
       << "kp_d = " << format_double(k.kp_d) << '\n'
       << "kd_alpha = " << format_double(k.kd_alpha) << '\n'
       << "kd_beta = " << format_double(k.kd_beta) << '\n'
       << "kd_gamma = " << format_double(k.kd_gamma) << '\n'
       << "kd_d = " << format_double(k.kd_d) << "\n\n";
    if (cfg.lqr_weights) {
        os << "[lqr]\n"
           << "q = " << detail::join(cfg.lqr_weights->q_diag.data(), 12) << '\n'
           << "r = " << detail::join(cfg.lqr_weights->r_diag.data(), 4) << "\n\n";
    }
    os << "[initial]\n"
       << "q = " << detail::join(cfg.initial_state.q.data(), 6) << '\n'
       << "qdot = " << detail::join(cfg.initial_state.qdot.data(), 6) << "\n\n";
    if (cfg.noise) {
        os << "[noise]\n"
           << "sigma_angles = " << format_double(cfg.noise->sigma_angles) << '\n'
           << "sigma_d = " << format_double(cfg.noise->sigma_d) << '\n'
           << "seed = " << cfg.noise->seed << "\n\n";
    }
    for (std::size_t i = 0; i < cfg.disturbances.size(); ++i) {
        const auto &g = cfg.disturbances[i];
        os << "[gust" << i << "]\n"
           << "t_start = " << format_double(g.t_start) << '\n'
           << "duration = " << format_double(g.duration) << '\n'
           << "force = " << detail::join(g.force_world.data(), 3) << "\n\n";
    }
}

} // namespace kbcrane
