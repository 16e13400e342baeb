#pragma once

/**
 * @file io.hpp
 * @brief CSV and JSON serialization of reports.
 *
 * Numbers are printed with 12 significant digits so emitted files diff
 * cleanly across runs of the same build. CSV schemas are fixed:
 *
 *   trajectory: t,s1,x1,s2,x2,z1,z2          (single tank leaves s2,x2,z2 empty)
 *   sweep:      <param>,s_out[s_in=<v>],...  (one column per input series,
 *                                             empty cells where a point is
 *                                             outside the domain or failed)
 *
 * JSON reports carry the schema marker "chemnet/1" in a "schema" field.
 */

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "chemnet/analysis.hpp"
#include "chemnet/equilibrium.hpp"
#include "chemnet/model.hpp"
#include "chemnet/simulate.hpp"
#include "chemnet/stability.hpp"

namespace chemnet {

inline constexpr const char* kSchemaVersion = "chemnet/1";

/// 12-significant-digit rendering used for all CSV numbers.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline const char* to_string(ConfigKind kind) {
    switch (kind) {
        case ConfigKind::SingleTank: return "single";
        case ConfigKind::Serial: return "serial";
        case ConfigKind::ParallelDiffusion: return "parallel";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, bool two_compartments) {
    os << "t,s1,x1,s2,x2,z1,z2\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const NetworkState& y = traj.states[i];
        os << format_number(traj.times[i]) << ',' << format_number(y.s1) << ','
           << format_number(y.x1) << ',';
        if (two_compartments) {
            os << format_number(y.s2) << ',' << format_number(y.x2) << ','
               << format_number(traj.z1[i]) << ',' << format_number(traj.z2[i]);
        } else {
            os << ",," << format_number(traj.z1[i]) << ',';
        }
        os << '\n';
    }
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
    os << sweep.param_name;
    for (const auto& series : sweep.series) {
        os << ",s_out[s_in=" << format_number(series.s_in) << ']';
    }
    os << '\n';
    for (std::size_t i = 0; i < sweep.grid.size(); ++i) {
        os << format_number(sweep.grid[i]);
        for (const auto& series : sweep.series) {
            os << ',';
            if (std::isfinite(series.values[i])) {
                os << format_number(series.values[i]);
            }
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const GrowthLaw& law) {
    if (law.is_linear()) {
        return {{"kind", "linear"}, {"m", law.slope_coefficient()}};
    }
    return {{"kind", "monod"}, {"mu_max", law.mu_max()}, {"K", law.half_saturation()}};
}

inline nlohmann::json to_json(const Configuration& config) {
    nlohmann::json j{{"variant", to_string(config.kind())}};
    if (config.compartments() == 2) {
        j["r"] = config.r();
    }
    if (config.kind() == ConfigKind::ParallelDiffusion) {
        j["alpha"] = config.alpha();
        j["d"] = config.d();
    }
    return j;
}

inline nlohmann::json to_json(const NetworkState& state) {
    nlohmann::json j{{"s1", state.s1}, {"x1", state.x1}};
    if (state.compartments() == 2) {
        j["s2"] = state.s2;
        j["x2"] = state.x2;
    }
    return j;
}

inline nlohmann::json to_json(const EquilibriumReport& report) {
    nlohmann::json j{
        {"kind", to_string(report.kind)},
        {"state", to_json(report.state)},
        {"s_out", report.s_out},
        {"residual", report.residual},
        {"flagged", report.flagged},
    };
    if (!report.note.empty()) j["note"] = report.note;
    if (std::isfinite(report.g_residual)) {
        j["g_residual"] = report.g_residual;
        j["g_prime"] = report.g_prime;
        j["root_count"] = report.root_count;
    }
    if (!report.extra_roots.empty()) j["extra_roots"] = report.extra_roots;
    return j;
}

inline nlohmann::json to_json(const StabilityCertificate& cert) {
    nlohmann::json eigs = nlohmann::json::array();
    for (const auto& ev : cert.eigenvalues) {
        eigs.push_back({ev.real(), ev.imag()});
    }
    return {
        {"verdict", to_string(cert.verdict)},
        {"eigenvalues", eigs},
        {"max_real_part", cert.max_real_part},
        {"mass_matrix_trace", cert.mass_matrix_trace},
        {"mass_matrix_det", cert.mass_matrix_det},
        {"jstar_trace", cert.jac_trace},
        {"jstar_det", cert.jac_det},
        {"fd_flagged", cert.fd_flagged},
    };
}

inline nlohmann::json to_json(const ThresholdSet& thresholds) {
    nlohmann::json j{{"numeric", thresholds.numeric}};
    auto put = [&j](const char* key, double v) {
        if (std::isfinite(v)) {
            j[key] = v;
        } else {
            j[key] = nullptr;
        }
    };
    put("sin0", thresholds.sin0);
    put("sin_lower", thresholds.sin_lower);
    put("sin_crossover", thresholds.sin_crossover);
    return j;
}

inline nlohmann::json to_json(const SweepResult& sweep) {
    nlohmann::json series = nlohmann::json::array();
    for (const auto& s : sweep.series) {
        nlohmann::json entry{{"s_in", s.s_in}};
        if (sweep.param_name == "d") {
            entry["d_star"] = std::isinf(s.d_star) ? nlohmann::json("inf")
                                                   : nlohmann::json(s.d_star);
            entry["s_out_min"] = s.s_out_min;
        }
        series.push_back(entry);
    }
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& f : sweep.flagged) {
        flagged.push_back({{"s_in", f.s_in}, {sweep.param_name, f.param}, {"note", f.note}});
    }
    nlohmann::json j{
        {"schema", kSchemaVersion},
        {"parameter", sweep.param_name},
        {"growth", to_json(sweep.law)},
        {"series", series},
        {"flagged", flagged},
    };
    if (sweep.param_name == "d") {
        j["r"] = sweep.r;
        j["alpha"] = sweep.alpha;
        if (sweep.thresholds) j["thresholds"] = to_json(*sweep.thresholds);
    }
    return j;
}

inline nlohmann::json to_json(const ConvergenceReport& report) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : report.failures) {
        failures.push_back({{"trial", f.trial},
                            {"trial_seed", f.trial_seed},
                            {"distance", f.distance},
                            {"final_state", to_json(f.final_state)}});
    }
    return {
        {"schema", kSchemaVersion},
        {"trials", report.n_trials},
        {"converged", report.n_converged},
        {"worst_settle_time", report.worst_settle_time},
        {"fitted_decay_rate", report.fitted_decay_rate},
        {"dominant_rate", report.dominant_rate},
        {"seed", report.seed},
        {"target", to_json(report.target)},
        {"failures", failures},
    };
}

/// Flat dimensionless scenario block, directly reusable as a JSON scenario
/// file (the round-trip contract of the CLI reports).
inline nlohmann::json scenario_echo(const Configuration& config, const GrowthLaw& law,
                                    double s_in) {
    nlohmann::json j{{"config", to_string(config.kind())}, {"s_in", s_in}};
    if (config.compartments() == 2) j["r"] = config.r();
    if (config.kind() == ConfigKind::ParallelDiffusion) {
        j["alpha"] = config.alpha();
        j["d"] = config.d();
    }
    if (law.is_linear()) {
        j["growth"] = "linear";
        j["m"] = law.slope_coefficient();
    } else {
        j["growth"] = "monod";
        j["mu_max"] = law.mu_max();
        j["K"] = law.half_saturation();
    }
    return j;
}

inline nlohmann::json to_json(const ComparisonReport& report) {
    auto family = [](const FamilyBest& best) {
        nlohmann::json j{{"valid", best.valid}};
        if (best.valid) {
            j["s_out"] = best.s_out;
            j["r"] = best.r;
            if (std::isfinite(best.alpha)) j["alpha"] = best.alpha;
            if (std::isfinite(best.d)) j["d"] = best.d;
        }
        return j;
    };
    return {
        {"schema", kSchemaVersion},
        {"s_in", report.s_in},
        {"baseline", report.baseline},
        {"serial", family(report.serial)},
        {"parallel", family(report.parallel)},
        {"verdict", to_string(report.verdict)},
        {"parallel_requires_diffusion", report.parallel_requires_diffusion},
    };
}

}  // namespace chemnet
