#pragma once

// Command-line front end: simulate, compare and verify.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime or domain error,
// 3 property-suite failure. The output directory defaults to $KBCRANE_OUT_DIR,
// or ./out when the variable is unset; --out overrides both.

#include "kbcrane/config.hpp"
#include "kbcrane/csv.hpp"
#include "kbcrane/plot_svg.hpp"
#include "kbcrane/properties.hpp"
#include "kbcrane/riccati.hpp"
#include "kbcrane/simulation.hpp"
#include "kbcrane/version.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace kbcrane {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitProperty = 3 };

inline constexpr const char *kOutDirEnv = "KBCRANE_OUT_DIR";

namespace cli_detail {

namespace fs = std::filesystem;

struct RunOptions {
    int scenario = 0;
    std::string config;
    std::string controller;
    double dt = 0.0;
    double t_final = 0.0;
    std::string out;
    std::uint64_t seed = 0;
    bool plot = false;
};

inline ScenarioConfig resolve_config(const RunOptions &o, CLI::App &app) {
    if (!o.config.empty() && app.count("--scenario"))
        throw ConfigError("--scenario and --config are mutually exclusive");
    ScenarioConfig cfg = o.config.empty() ? scenario_preset(o.scenario ? o.scenario : 1)
                                          : load_config(o.config);
    if (!o.controller.empty()) cfg.controller = parse_controller(o.controller);
    if (app.count("--dt")) cfg.dt = o.dt;
    if (app.count("--t-final")) cfg.t_final = o.t_final;
    if (app.count("--seed")) cfg.rng_seed = o.seed;
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline fs::path output_dir(const RunOptions &o) {
    if (!o.out.empty()) return o.out;
    if (const char *env = std::getenv(kOutDirEnv); env && *env) return env;
    return "out";
}

inline void ensure_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
}

inline std::string fmt_opt(const std::optional<double> &v) {
    if (!v) return "not settled";
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << *v;
    return os.str();
}

inline std::string fmt(double v, int precision = 4) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

inline void write_metrics_section(std::ostream &os, const char *section, const MetricsReport &r,
                                  const SimulationResult &sim) {
    static const char *names[4] = {"alpha", "beta", "gamma", "d"};
    os << '[' << section << "]\n";
    for (int i = 0; i < 4; ++i)
        os << "settling_" << names[i] << " = "
           << (r.settling_time[i] ? format_double(*r.settling_time[i]) : "none") << '\n';
    const auto overall = r.overall_settling_time();
    os << "settling_overall = " << (overall ? format_double(*overall) : "none") << '\n'
       << "residual_theta1 = " << format_double(r.residual_swing[0]) << '\n'
       << "residual_theta2 = " << format_double(r.residual_swing[1]) << '\n';
    for (int i = 0; i < 4; ++i)
        os << "peak_u" << i + 1 << " = " << format_double(r.peak_input[i]) << '\n';
    for (int i = 0; i < 4; ++i)
        os << "final_error_" << names[i] << " = " << format_double(r.final_error[i]) << '\n';
    os << "initial_V = " << format_double(r.initial_V) << '\n'
       << "final_V = " << format_double(r.final_V) << '\n'
       << "rows = " << sim.log.rows.size() << '\n'
       << "status = " << (sim.aborted ? "aborted" : "completed") << "\n\n";
}

inline std::vector<double> column(const TrajectoryLog &log, auto &&get) {
    std::vector<double> v;
    v.reserve(log.rows.size());
    for (const auto &r : log.rows) v.push_back(get(r));
    return v;
}

inline std::vector<double> times(const TrajectoryLog &log) {
    return column(log, [](const TrajectoryRow &r) { return r.t; });
}

inline const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

/// Single-run figures: actuated angles, cable length, swing angles, inputs.
inline std::vector<fs::path> write_run_plots(const fs::path &dir, const std::string &stem,
                                             const TrajectoryLog &log, const Setpoint &sp) {
    std::vector<fs::path> files;
    const auto t = times(log);
    auto deg = [&](int i) {
        return column(log, [i](const TrajectoryRow &r) { return r.q[i] * kRadToDeg; });
    };
    auto constant = [&](double v) { return std::vector<double>(t.size(), v); };

    LineChart angles{"Actuated angles", "t [s]", "angle [deg]", t, {}};
    const double refs[3] = {sp.alpha_d, sp.beta_d, sp.gamma_d};
    const char *labels[3] = {"alpha", "beta", "gamma"};
    for (int i = 0; i < 3; ++i) {
        angles.series.push_back({labels[i], deg(i), kPalette[i]});
        angles.series.push_back({std::string(labels[i]) + " ref", constant(refs[i] * kRadToDeg),
                                 kPalette[i], true});
    }
    LineChart cable{"Cable length", "t [s]", "d [m]", t,
                    {{"d", column(log, [](const TrajectoryRow &r) { return r.q[kCable]; }),
                      kPalette[0]},
                     {"d ref", constant(sp.d_d), kPalette[1], true}}};
    LineChart swing{"Payload swing angles", "t [s]", "angle [deg]", t,
                    {{"theta1", deg(kTheta1), kPalette[0]}, {"theta2", deg(kTheta2), kPalette[1]}}};
    auto input = [&](int i) {
        return column(log, [i](const TrajectoryRow &r) { return r.u[i]; });
    };
    LineChart u12{"Inputs u1, u2", "t [s]", "torque [N m]", t,
                  {{"u1", input(0), kPalette[0]}, {"u2", input(1), kPalette[1]}}};
    LineChart u34{"Inputs u3, u4", "t [s]", "torque [N m] / force [N]", t,
                  {{"u3", input(2), kPalette[0]}, {"u4", input(3), kPalette[1]}}};

    const std::pair<const char *, const LineChart *> charts[] = {
        {"actuated", &angles}, {"cable", &cable}, {"swing", &swing}, {"u12", &u12}, {"u34", &u34}};
    for (const auto &[suffix, chart] : charts) {
        const fs::path path = dir / (stem + "_" + suffix + ".svg");
        write_svg(path.string(), *chart);
        files.push_back(path);
    }
    return files;
}

/// Overlay figures of the two controllers, one per coordinate and input.
inline std::vector<fs::path> write_compare_plots(const fs::path &dir, const std::string &stem,
                                                 const TrajectoryLog &pd, const TrajectoryLog &lqr,
                                                 const Setpoint &sp) {
    std::vector<fs::path> files;
    // The LQR run may have stopped early; pad with NaN so both share the PD grid.
    const auto t = times(pd);
    auto series = [&](const TrajectoryLog &log, auto &&get) {
        std::vector<double> v(t.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t k = 0; k < std::min(v.size(), log.rows.size()); ++k) v[k] = get(log.rows[k]);
        return v;
    };
    const Vec4 ref = sp.as_vector();
    for (int i = 0; i < 6; ++i) {
        const bool angle = i != kCable;
        const double scale = angle ? kRadToDeg : 1.0;
        auto get = [i, scale](const TrajectoryRow &r) { return r.q[i] * scale; };
        LineChart c{std::string("Controller comparison: ") + kCoordNames[i], "t [s]",
                    angle ? "angle [deg]" : "length [m]", t,
                    {{"nonlinear", series(pd, get), kPalette[0]},
                     {"LQR", series(lqr, get), kPalette[1]}}};
        if (i < 4)
            c.series.push_back({"reference", std::vector<double>(t.size(), ref[i] * scale),
                                kPalette[2], true});
        const fs::path path = dir / (stem + "_" + kCoordNames[i] + ".svg");
        write_svg(path.string(), c);
        files.push_back(path);
    }
    for (int i = 0; i < 4; ++i) {
        auto get = [i](const TrajectoryRow &r) { return r.u[i]; };
        const std::string name = "u" + std::to_string(i + 1);
        LineChart c{"Controller comparison: " + name, "t [s]", name, t,
                    {{"nonlinear", series(pd, get), kPalette[0]},
                     {"LQR", series(lqr, get), kPalette[1]}}};
        const fs::path path = dir / (stem + "_" + name + ".svg");
        write_svg(path.string(), c);
        files.push_back(path);
    }
    return files;
}

inline void add_run_options(CLI::App &cmd, RunOptions &o, bool with_controller) {
    cmd.add_option("--scenario", o.scenario, "built-in scenario preset")
        ->check(CLI::Range(1, 5));
    cmd.add_option("--config", o.config, "scenario configuration file");
    if (with_controller)
        cmd.add_option("--controller", o.controller, "pd or lqr")
            ->check(CLI::IsMember({"pd", "lqr"}));
    cmd.add_option("--dt", o.dt, "integration step [s]");
    cmd.add_option("--t-final", o.t_final, "simulated duration [s]");
    cmd.add_option("--out", o.out, "output directory");
    cmd.add_option("--seed", o.seed, "random seed");
    cmd.add_flag("--plot", o.plot, "write SVG figures");
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

inline std::string stem_for(const ScenarioConfig &cfg) {
    return cfg.name + "_" + to_string(cfg.controller);
}

} // namespace cli_detail

/// simulate: one closed-loop run to CSV + manifest (+ SVG figures).
inline int cmd_simulate(const cli_detail::RunOptions &o, CLI::App &cmd, std::ostream &out,
                        std::ostream &err) {
    using namespace cli_detail;
    ScenarioConfig cfg;
    try {
        cfg = resolve_config(o, cmd);
    } catch (const std::exception &e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const fs::path dir = output_dir(o);
        ensure_dir(dir);
        const Timer timer;
        const SimulationResult sim = simulate(cfg);
        const double wall = timer.seconds();

        const std::string stem = stem_for(cfg);
        const fs::path csv = dir / (stem + ".csv");
        write_trajectory_csv(csv.string(), sim.log);
        std::vector<fs::path> plots;
        if (o.plot) plots = write_run_plots(dir, stem, sim.log, cfg.setpoint);

        const MetricsReport report = metrics(sim.log, cfg.setpoint);
        const fs::path manifest = dir / (stem + ".manifest.ini");
        {
            std::ofstream os(manifest, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write '" + manifest.string() + "'");
            write_config(os, cfg);
            os << "[run]\n"
               << "command = simulate\n"
               << "version = " << kVersion << '\n'
               << "rng_seed = " << cfg.rng_seed << '\n'
               << "noise_seed = " << (cfg.noise ? std::to_string(cfg.noise->seed) : "none") << '\n'
               << "csv = " << csv.string() << '\n';
            for (std::size_t i = 0; i < plots.size(); ++i)
                os << "plot" << i << " = " << plots[i].string() << '\n';
            os << "wall_clock_s = " << wall << '\n'
               << "abort = " << (sim.aborted ? sim.aborted->what() : "none") << "\n\n";
            write_metrics_section(os, "metrics", report, sim);
        }

        out << "scenario " << cfg.name << " (" << to_string(cfg.controller) << "): "
            << sim.log.rows.size() << " rows, " << fmt(wall, 3) << " s wall clock\n";
        for (int i = 0; i < 4; ++i)
            out << "  settling " << kCoordNames[i] << ": " << fmt_opt(report.settling_time[i])
                << '\n';
        out << "  residual swing theta1/theta2 [deg]: " << fmt(report.residual_swing[0] * kRadToDeg)
            << " / " << fmt(report.residual_swing[1] * kRadToDeg) << '\n'
            << "  V final / V initial: " << fmt(report.final_V) << " / " << fmt(report.initial_V)
            << '\n'
            << "  csv: " << csv.string() << "\n  manifest: " << manifest.string() << '\n';
        if (sim.aborted) {
            err << "simulation aborted: " << sim.aborted->what() << '\n';
            return kExitRuntime;
        }
        return kExitOk;
    } catch (const RiccatiError &e) {
        err << "Riccati failure: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception &e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

/// compare: the same scenario under the nonlinear law and under LQR.
inline int cmd_compare(const cli_detail::RunOptions &o, CLI::App &cmd, std::ostream &out,
                       std::ostream &err) {
    using namespace cli_detail;
    ScenarioConfig base;
    try {
        base = resolve_config(o, cmd);
    } catch (const std::exception &e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    }
    ScenarioConfig cfg_pd = base, cfg_lqr = base;
    cfg_pd.controller = ControllerKind::PdGravity;
    cfg_lqr.controller = ControllerKind::Lqr;

    try {
        const fs::path dir = output_dir(o);
        ensure_dir(dir);
        const Timer timer;
        const SimulationResult pd = simulate(cfg_pd);
        SimulationResult lqr;
        try {
            lqr = simulate(cfg_lqr);
        } catch (const RiccatiError &e) {
            err << "Riccati failure: " << e.what() << '\n';
            return kExitRuntime;
        }
        const double wall = timer.seconds();

        const fs::path csv_pd = dir / (stem_for(cfg_pd) + ".csv");
        const fs::path csv_lqr = dir / (stem_for(cfg_lqr) + ".csv");
        write_trajectory_csv(csv_pd.string(), pd.log);
        write_trajectory_csv(csv_lqr.string(), lqr.log);
        const std::string stem = base.name + "_compare";
        std::vector<fs::path> plots;
        if (o.plot) plots = write_compare_plots(dir, stem, pd.log, lqr.log, base.setpoint);

        const MetricsReport m_pd = metrics(pd.log, base.setpoint);
        const MetricsReport m_lqr = metrics(lqr.log, base.setpoint);

        std::ostringstream table;
        table << std::left << std::setw(30) << "metric" << std::setw(18) << "nonlinear"
              << "LQR\n";
        auto row = [&](const std::string &name, const std::string &a, const std::string &b) {
            table << std::left << std::setw(30) << name << std::setw(18) << a << b << '\n';
        };
        row("status", pd.aborted ? "aborted" : "completed", lqr.aborted ? "aborted" : "completed");
        for (int i = 0; i < 4; ++i)
            row(std::string("settling ") + kCoordNames[i] + " [s]", fmt_opt(m_pd.settling_time[i]),
                fmt_opt(m_lqr.settling_time[i]));
        row("residual theta1 [deg]", fmt(m_pd.residual_swing[0] * kRadToDeg),
            fmt(m_lqr.residual_swing[0] * kRadToDeg));
        row("residual theta2 [deg]", fmt(m_pd.residual_swing[1] * kRadToDeg),
            fmt(m_lqr.residual_swing[1] * kRadToDeg));
        for (int i = 0; i < 4; ++i)
            row("peak |u" + std::to_string(i + 1) + "|", fmt(m_pd.peak_input[i]),
                fmt(m_lqr.peak_input[i]));
        for (int i = 0; i < 4; ++i)
            row(std::string("final error ") + kCoordNames[i], fmt(m_pd.final_error[i]),
                fmt(m_lqr.final_error[i]));

        std::vector<std::string> worse;
        for (int i = 0; i < 4; ++i)
            if (std::abs(m_lqr.final_error[i]) > std::abs(m_pd.final_error[i]))
                worse.push_back(kCoordNames[i]);
        table << "LQR final tracking error larger on:";
        if (worse.empty()) table << " none";
        for (const auto &w : worse) table << ' ' << w;
        table << '\n';
        if (lqr.aborted) table << "LQR run: " << lqr.aborted->what() << '\n';
        if (pd.aborted) table << "nonlinear run: " << pd.aborted->what() << '\n';

        const fs::path table_path = dir / (stem + ".txt");
        {
            std::ofstream os(table_path, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write '" + table_path.string() + "'");
            os << table.str();
        }
        const fs::path manifest = dir / (stem + ".manifest.ini");
        {
            std::ofstream os(manifest, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write '" + manifest.string() + "'");
            write_config(os, base);
            os << "[run]\n"
               << "command = compare\n"
               << "version = " << kVersion << '\n'
               << "rng_seed = " << base.rng_seed << '\n'
               << "csv_pd = " << csv_pd.string() << '\n'
               << "csv_lqr = " << csv_lqr.string() << '\n'
               << "table = " << table_path.string() << '\n';
            for (std::size_t i = 0; i < plots.size(); ++i)
                os << "plot" << i << " = " << plots[i].string() << '\n';
            os << "wall_clock_s = " << wall << "\n\n";
            // Manifest-only sections; the configuration reader skips them.
            write_metrics_section(os, "metrics", m_pd, pd);
            write_metrics_section(os, "metrics_lqr", m_lqr, lqr);
        }

        out << table.str() << "csv: " << csv_pd.string() << ", " << csv_lqr.string() << '\n';
        if (pd.aborted || lqr.aborted) return kExitRuntime;
        return kExitOk;
    } catch (const RiccatiError &e) {
        err << "Riccati failure: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception &e) {
        err << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

/// verify: structural property suite; exit 3 when any property fails.
inline int cmd_verify(std::size_t samples, std::uint64_t seed, std::ostream &out,
                      std::ostream &err, std::function<void(Mat6 &)> perturb_coriolis = {}) {
    PropertySuiteOptions opt;
    opt.samples = samples;
    opt.seed = seed;
    opt.perturb_coriolis = std::move(perturb_coriolis);
    const auto results = run_property_suite(opt);
    bool ok = true;
    out << "property suite: " << samples << " samples, seed " << seed << '\n';
    for (const auto &r : results) {
        out << "  " << std::left << std::setw(18) << r.name << (r.passed ? "PASS" : "FAIL")
            << "  worst " << std::setprecision(3) << std::scientific << r.worst << "  threshold "
            << r.threshold << std::defaultfloat << (r.note.empty() ? "" : "  ") << r.note << '\n';
        if (!r.passed) {
            ok = false;
            err << "property '" << r.name << "' failed; worst state q = ["
                << r.worst_state.q.transpose().format(Eigen::IOFormat(17, Eigen::DontAlignCols, ", "))
                << "], qdot = ["
                << r.worst_state.qdot.transpose().format(
                       Eigen::IOFormat(17, Eigen::DontAlignCols, ", "))
                << "]\n";
        }
    }
    return ok ? kExitOk : kExitProperty;
}

/// Parses argv-style arguments (without the program name) and dispatches.
inline int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    using namespace cli_detail;
    CLI::App app{"Knuckle boom crane simulator", "kbcrane"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    RunOptions sim_opt, cmp_opt;
    auto *sim = app.add_subcommand("simulate", "run one closed-loop scenario");
    add_run_options(*sim, sim_opt, true);
    auto *cmp = app.add_subcommand("compare", "run a scenario under both controllers");
    add_run_options(*cmp, cmp_opt, false);
    std::size_t samples = 1000;
    std::uint64_t verify_seed = 20240531;
    auto *ver = app.add_subcommand("verify", "structural property suite");
    ver->add_option("--samples", samples, "number of random states")->check(CLI::PositiveNumber);
    ver->add_option("--seed", verify_seed, "random seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (*sim) return cmd_simulate(sim_opt, *sim, out, err);
    if (*cmp) return cmd_compare(cmp_opt, *cmp, out, err);
    return cmd_verify(samples, verify_seed, out, err);
}

inline int run_cli(int argc, char **argv, std::ostream &out, std::ostream &err) {
    return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace kbcrane
