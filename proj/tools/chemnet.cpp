// Command-line front end: scenario files in, equilibrium / threshold / sweep /
// simulation / comparison reports out. Exit codes: 0 success, 1 error,
// 2 washout-only (no surviving biomass).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chemnet/analysis.hpp"
#include "chemnet/equilibrium.hpp"
#include "chemnet/io.hpp"
#include "chemnet/model.hpp"
#include "chemnet/scenario.hpp"
#include "chemnet/simulate.hpp"
#include "chemnet/stability.hpp"

namespace {

using namespace chemnet;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitWashout = 2;

struct CommonFlags {
    std::string scenario_path;
    std::string out_path;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned jobs = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool scenario_required = true) {
    auto* opt = cmd->add_option("--scenario", flags.scenario_path, "Scenario file (text or JSON)");
    if (scenario_required) opt->required();
    cmd->add_option("--out", flags.out_path, "Output file path");
    cmd->add_option("--format", flags.format, "Output format (csv or json)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", flags.seed, "Random seed (overrides the scenario)")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--jobs", flags.jobs, "Worker threads for sweeps and trials")
        ->check(CLI::PositiveNumber);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write to '" + path + "'");
    out << content;
}

std::string state_line(const NetworkState& state) {
    std::string line = "(s1=" + format_number(state.s1) + ", x1=" + format_number(state.x1);
    if (state.compartments() == 2) {
        line += ", s2=" + format_number(state.s2) + ", x2=" + format_number(state.x2);
    }
    return line + ")";
}

// ---------------------------------------------------------------------------

int cmd_equilibrium(const CommonFlags& flags) {
    const Scenario scenario = load_scenario(flags.scenario_path);
    const DimensionlessScenario dimless = scenario.resolve();

    const EquilibriumReport report =
        solve_equilibrium(dimless.config, dimless.law, dimless.s_in);
    const StabilityCertificate cert = certify(report, dimless.law, dimless.config);

    json out{{"schema", kSchemaVersion},
             {"command", "equilibrium"},
             {"scenario", scenario_echo(dimless.config, dimless.law, dimless.s_in)},
             {"result", to_json(report)},
             {"stability", to_json(cert)}};
    if (!flags.out_path.empty()) write_file(flags.out_path, out.dump(2) + "\n");

    if (flags.format == "json") {
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "configuration: " << to_string(dimless.config.kind());
        if (dimless.config.compartments() == 2) {
            std::cout << " (r=" << format_number(dimless.config.r());
            if (dimless.config.kind() == ConfigKind::ParallelDiffusion) {
                std::cout << ", alpha=" << format_number(dimless.config.alpha())
                          << ", d=" << format_number(dimless.config.d());
            }
            std::cout << ')';
        }
        std::cout << "\ns_in: " << format_number(dimless.s_in)
                  << "\nkind: " << to_string(report.kind) << "\nstate: "
                  << state_line(report.state) << "\ns_out*: " << format_number(report.s_out)
                  << "\nresidual: " << format_number(report.residual)
                  << "\nstability: " << to_string(cert.verdict) << '\n';
        if (report.flagged) std::cout << "note: " << report.note << '\n';
    }
    return report.has_biomass() ? kExitOk : kExitWashout;
}

// ---------------------------------------------------------------------------

int cmd_thresholds(const CommonFlags& flags, const std::optional<double>& r_flag,
                   const std::optional<double>& alpha_flag) {
    double r = 0.0;
    double alpha = 0.0;
    GrowthLaw law = GrowthLaw::linear(1.0);
    if (!flags.scenario_path.empty()) {
        const Scenario scenario = load_scenario(flags.scenario_path);
        const DimensionlessScenario dimless = scenario.resolve();
        if (dimless.config.kind() != ConfigKind::ParallelDiffusion) {
            throw std::runtime_error("thresholds: scenario must use config = parallel");
        }
        r = dimless.config.r();
        alpha = dimless.config.alpha();
        law = dimless.law;
    } else if (r_flag && alpha_flag) {
        r = *r_flag;
        alpha = *alpha_flag;
    } else {
        throw std::runtime_error("thresholds: pass --scenario or both --r and --alpha");
    }

    const ThresholdSet thresholds = compute_thresholds(r, alpha, law);
    json out{{"schema", kSchemaVersion},
             {"command", "thresholds"},
             {"r", r},
             {"alpha", alpha},
             {"growth", to_json(law)},
             {"thresholds", to_json(thresholds)}};
    if (!flags.out_path.empty()) write_file(flags.out_path, out.dump(2) + "\n");
    if (flags.format == "json") {
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "r=" << format_number(r) << " alpha=" << format_number(alpha)
                  << (thresholds.numeric ? "  (numeric, no closed form)" : "") << '\n'
                  << "sin0 (zero-diffusion benefit threshold): "
                  << format_number(thresholds.sin0) << '\n'
                  << "sin_lower (interior optimum threshold):  "
                  << format_number(thresholds.sin_lower) << '\n'
                  << "sin_crossover (serial/parallel reversal): "
                  << format_number(thresholds.sin_crossover) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_sweep(const CommonFlags& flags) {
    const Scenario scenario = load_scenario(flags.scenario_path);
    if (!scenario.sweep.present) {
        throw std::runtime_error("sweep: scenario has no sweep block");
    }
    const DimensionlessScenario dimless = scenario.resolve();
    const std::vector<double> s_in_list = scenario.series_inputs();

    std::vector<double> grid =
        scenario.sweep.scale == "log"
            ? log_grid(scenario.sweep.min, scenario.sweep.max, scenario.sweep.count)
            : linear_grid(scenario.sweep.min, scenario.sweep.max, scenario.sweep.count);

    SweepResult result;
    if (scenario.sweep.parameter == "r") {
        result = sweep_serial(s_in_list, grid, dimless.law, flags.jobs);
    } else {
        // The zero-diffusion row cannot appear on a log grid; prepend it.
        if (scenario.sweep.scale == "log") grid.insert(grid.begin(), 0.0);
        result = sweep_parallel(s_in_list, grid, dimless.config.r(), dimless.config.alpha(),
                                dimless.law, flags.jobs);
    }

    std::ostringstream csv;
    write_sweep_csv(csv, result);

    const std::string out_path =
        !flags.out_path.empty() ? flags.out_path : scenario.output.path;
    json summary = to_json(result);
    summary["command"] = "sweep";
    summary["scenario"] = scenario_echo(dimless.config, dimless.law, dimless.s_in);
    summary["s_in_list"] = s_in_list;
    if (out_path.empty()) {
        std::cout << csv.str();
    } else {
        write_file(out_path, csv.str());
        summary["csv"] = out_path;
        std::cout << summary.dump(2) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const CommonFlags& flags) {
    const Scenario scenario = load_scenario(flags.scenario_path);
    const DimensionlessScenario dimless = scenario.resolve();
    const std::uint64_t seed = flags.seed_set ? flags.seed : scenario.sim.seed;

    if (scenario.sim.trials > 0) {
        const ConvergenceReport report = verify_global_convergence(
            dimless.config, dimless.law, dimless.s_in,
            static_cast<std::size_t>(scenario.sim.trials), seed, flags.jobs);
        json out = to_json(report);
        out["command"] = "simulate";
        out["scenario"] = scenario_echo(dimless.config, dimless.law, dimless.s_in);
        if (!flags.out_path.empty()) write_file(flags.out_path, out.dump(2) + "\n");
        std::cout << report.n_converged << '/' << report.n_trials << " converged\n";
        if (flags.format == "json" || flags.out_path.empty()) std::cout << out.dump(2) << '\n';
        return report.n_converged == report.n_trials ? kExitOk : kExitError;
    }

    if (scenario.sim.initial.empty()) {
        throw std::runtime_error("simulate: scenario needs 'initial' (trajectory) or 'trials'");
    }
    NetworkState initial =
        dimless.config.compartments() == 1
            ? NetworkState::single(scenario.sim.initial[0], scenario.sim.initial[1])
            : NetworkState::pair(scenario.sim.initial[0], scenario.sim.initial[1],
                                 scenario.sim.initial[2], scenario.sim.initial[3]);

    SimulateOptions opts;
    opts.rel_tol = scenario.sim.rel_tol;
    opts.abs_tol = scenario.sim.abs_tol;
    constexpr int kSamples = 400;
    const double spacing = scenario.sim.t_end / kSamples;
    for (int i = 1; i <= kSamples; ++i) opts.sample_times.push_back(spacing * i);
    opts.record_interval = spacing * (1.0 - 1e-9);

    Trajectory traj;
    try {
        traj = integrate(dimless.config, dimless.law, initial, dimless.s_in,
                         scenario.sim.t_end, opts);
    } catch (const IntegrationError& err) {
        std::cerr << "error: " << err.what() << "\nlast state at t=" << format_number(err.time())
                  << ':';
        for (double v : err.state()) std::cerr << ' ' << format_number(v);
        std::cerr << '\n';
        return kExitError;
    }

    std::ostringstream csv;
    write_trajectory_csv(csv, traj, dimless.config.compartments() == 2);
    if (flags.out_path.empty()) {
        std::cout << csv.str();
    } else {
        write_file(flags.out_path, csv.str());
        json summary{{"schema", kSchemaVersion},
                     {"command", "simulate"},
                     {"scenario", scenario_echo(dimless.config, dimless.law, dimless.s_in)},
                     {"csv", flags.out_path},
                     {"settled", traj.settled},
                     {"samples", traj.times.size()}};
        if (traj.settled) summary["settle_time"] = traj.settle_time;
        std::cout << summary.dump(2) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_compare(const CommonFlags& flags, std::optional<double> s_in_flag) {
    GrowthLaw law = GrowthLaw::linear(1.0);
    double s_in = 0.0;
    if (!flags.scenario_path.empty()) {
        const Scenario scenario = load_scenario(flags.scenario_path);
        const DimensionlessScenario dimless = scenario.resolve();
        law = dimless.law;
        s_in = dimless.s_in;
    }
    if (s_in_flag) s_in = *s_in_flag;
    if (!(s_in > 0.0)) {
        throw std::runtime_error("compare: pass --s-in or a scenario with s_in");
    }

    std::vector<double> r_grid = linear_grid(0.02, 0.98, 49);
    for (double r : {0.99, 0.999, 0.9999, 0.99999}) r_grid.push_back(r);
    std::vector<double> alpha_grid = linear_grid(0.0, 1.0, 21);
    std::vector<double> d_grid = log_grid(1e-3, 1e4, 22);
    d_grid.insert(d_grid.begin(), 0.0);
    d_grid.push_back(1e6);

    const ComparisonReport report =
        compare_configurations(s_in, law, r_grid, alpha_grid, d_grid, flags.jobs);
    json out = to_json(report);
    out["command"] = "compare";
    if (!flags.out_path.empty()) write_file(flags.out_path, out.dump(2) + "\n");
    if (flags.format == "json") {
        std::cout << out.dump(2) << '\n';
    } else {
        std::cout << "s_in=" << format_number(s_in)
                  << " baseline (single tank): " << format_number(report.baseline) << '\n';
        if (report.serial.valid) {
            std::cout << "serial best:   s_out=" << format_number(report.serial.s_out)
                      << " at r=" << format_number(report.serial.r) << '\n';
        }
        if (report.parallel.valid) {
            std::cout << "parallel best: s_out=" << format_number(report.parallel.s_out)
                      << " at r=" << format_number(report.parallel.r)
                      << ", alpha=" << format_number(report.parallel.alpha)
                      << ", d=" << format_number(report.parallel.d)
                      << (report.parallel_requires_diffusion ? "  (requires diffusion)" : "")
                      << '\n';
        }
        std::cout << "verdict: " << to_string(report.verdict) << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady-state analysis of single, serial and parallel chemostat networks"};
    app.require_subcommand(1);

    CommonFlags eq_flags, th_flags, sw_flags, sim_flags, cmp_flags;
    std::optional<double> th_r, th_alpha, cmp_s_in;

    auto* eq = app.add_subcommand("equilibrium", "Solve the steady state of a scenario");
    add_common(eq, eq_flags);

    auto* th = app.add_subcommand("thresholds", "Input-concentration thresholds for (r, alpha)");
    add_common(th, th_flags, /*scenario_required=*/false);
    th->add_option("--r", th_r, "Volume fraction of compartment 1");
    th->add_option("--alpha", th_alpha, "Inflow fraction to compartment 1");

    auto* sw = app.add_subcommand("sweep", "Sweep r (serial) or d (parallel) and emit CSV");
    add_common(sw, sw_flags);

    auto* sim = app.add_subcommand("simulate", "Integrate a trajectory or run convergence trials");
    add_common(sim, sim_flags);

    auto* cmp = app.add_subcommand("compare", "Best serial vs parallel vs single tank");
    add_common(cmp, cmp_flags, /*scenario_required=*/false);
    cmp->add_option("--s-in", cmp_s_in, "Input substrate concentration (dimensionless)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (eq->parsed()) return cmd_equilibrium(eq_flags);
        if (th->parsed()) return cmd_thresholds(th_flags, th_r, th_alpha);
        if (sw->parsed()) return cmd_sweep(sw_flags);
        if (sim->parsed()) return cmd_simulate(sim_flags);
        if (cmp->parsed()) return cmd_compare(cmp_flags, cmp_s_in);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
