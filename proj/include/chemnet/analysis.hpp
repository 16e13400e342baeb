#pragma once

/**
 * @file analysis.hpp
 * @brief Thresholds, the diffusion-response curve and its minimizer, parameter
 * sweeps and cross-configuration comparison.
 *
 * The central object is the map d -> s_out*(d) defined by the non-trivial
 * steady state of the parallel configuration. With linear kinetics it admits
 * closed-form thresholds on the input concentration:
 *
 *   sin0      = (r - alpha^2) / (r (1 - alpha))   (labels oriented a2 >= a1):
 *               zero diffusion already beats the single tank iff s_in < sin0;
 *   sin_lower = 2 a1 a2 / (a1 + a2): above it the best diffusion rate is
 *               strictly positive;
 *   crossover = 2 / m: above it no parallel configuration beats the single
 *               tank (and some serial one does), below it the reverse.
 *
 * For saturating kinetics no closed forms exist; the same quantities are
 * computed by bisection on the empirically monotone observables and flagged
 * numeric.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chemnet/equilibrium.hpp"
#include "chemnet/growth.hpp"
#include "chemnet/model.hpp"
#include "chemnet/parallel.hpp"
#include "chemnet/solvers.hpp"

namespace chemnet {

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

namespace analysis_detail {

/// Maps (r, alpha) to the orientation with a2 >= a1 (swap labels iff alpha > r).
inline void orient(double& r, double& alpha) {
    if (alpha > r) {
        r = 1.0 - r;
        alpha = 1.0 - alpha;
    }
}

}  // namespace analysis_detail

/**
 * @brief Input threshold below which the uncoupled (d = 0) parallel pair
 * already beats the single tank: s_out*(0) >= 1 iff s_in >= sin0.
 *
 * Unit-slope linear kinetics; labels are oriented internally so a2 >= a1.
 * Always lies in [1, 2), equal to 1 exactly when alpha = r.
 */
inline double threshold_sin0(double r, double alpha) {
    if (!(r > 0.0 && r < 1.0) || !(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("threshold_sin0: requires r in (0,1) and alpha in [0,1]");
    }
    if (alpha == r) return 1.0;
    analysis_detail::orient(r, alpha);
    return (r - alpha * alpha) / (r * (1.0 - alpha));
}

/**
 * @brief Input threshold above which the minimizing diffusion rate is
 * strictly positive: the harmonic mean 2 a1 a2 / (a1 + a2) of the dilution
 * rates. Unit-slope linear kinetics; labels oriented internally.
 */
inline double threshold_underline_sin(double r, double alpha) {
    if (!(r > 0.0 && r < 1.0) || !(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("threshold_underline_sin: requires r in (0,1) and alpha in [0,1]");
    }
    analysis_detail::orient(r, alpha);
    const double a1 = alpha / r;
    const double a2 = (1.0 - alpha) / (1.0 - r);
    return 2.0 * a1 * a2 / (a1 + a2);
}

/// Threshold bundle reported by the CLI. The crossover is the input level at
/// which the parallel family stops beating the single tank.
struct ThresholdSet {
    double sin0 = std::numeric_limits<double>::quiet_NaN();
    double sin_lower = std::numeric_limits<double>::quiet_NaN();
    double sin_crossover = std::numeric_limits<double>::quiet_NaN();
    bool numeric = false;  ///< true when obtained by bisection (no closed form)
};

// ---------------------------------------------------------------------------
// Diffusion response d -> s_out*(d)
// ---------------------------------------------------------------------------

/// Sensitivity of the parallel steady state to the diffusion rate.
/// All block quantities (A, B, det_gamma, sigma) are reported in the
/// oriented frame a2 >= a1; the state derivatives refer to the original
/// compartment labels and dsout_dd is orientation-invariant.
struct DiffusionSensitivity {
    double dsout_dd = 0.0;
    double ds1_dd = 0.0;
    double ds2_dd = 0.0;
    double sigma = 0.0;
    double A = 0.0;
    double B = 0.0;
    double det_gamma = 0.0;
};

/**
 * @brief Analytic derivative of (s1*, s2*, s_out*) with respect to d.
 *
 * Differentiating the steady-state relations gives
 *   Gamma (ds1, ds2)^T = (s2* - s1*) (1, 1)^T,
 *   Gamma = [[A + d, -d], [d, -B - d]],
 *   A = r ((s_in - s1*) m - (mu(s1*) - a1)),  B analogous for compartment 2,
 *   det(Gamma) = -d^2 g'(s1*) < 0 at a certified equilibrium,
 * so ds1 = (s2*-s1*)(-B)/det, ds2 = (s2*-s1*) A / det and
 * dsout = (s2*-s1*)(alpha B - (1-alpha) A)/(-det). Linear kinetics only;
 * det(Gamma) >= 0 indicates a broken root certificate and is a hard error.
 */
inline DiffusionSensitivity dsout_dd(double s_in, double r, double alpha, double d,
                                     const EquilibriumReport& eq,
                                     const GrowthLaw& law = GrowthLaw::linear(1.0)) {
    if (!law.is_linear()) {
        throw std::invalid_argument("dsout_dd: analytic derivative requires linear kinetics");
    }
    if (!(d > 0.0)) {
        throw std::invalid_argument("dsout_dd: requires d > 0");
    }
    if (eq.kind != EquilibriumKind::NonTrivial) {
        throw std::invalid_argument("dsout_dd: requires the non-trivial equilibrium");
    }
    const double m = law.slope_coefficient();

    const bool swapped = alpha > r;
    const double ro = swapped ? 1.0 - r : r;
    const double ao = swapped ? 1.0 - alpha : alpha;
    const double s1o = swapped ? eq.state.s2 : eq.state.s1;
    const double s2o = swapped ? eq.state.s1 : eq.state.s2;
    const double a1 = ao / ro;
    const double a2 = (1.0 - ao) / (1.0 - ro);

    const double A = ro * ((s_in - s1o) * m - (m * s1o - a1));
    const double B = (1.0 - ro) * ((s_in - s2o) * m - (m * s2o - a2));
    const double det_gamma = -(A + d) * (B + d) + d * d;
    if (!(det_gamma < 0.0)) {
        throw std::logic_error("dsout_dd: det(Gamma) >= 0 contradicts the root certificate");
    }
    const double gap = s2o - s1o;
    DiffusionSensitivity out;
    out.A = A;
    out.B = B;
    out.det_gamma = det_gamma;
    out.sigma = (ao * B - (1.0 - ao) * A) / (ro * (1.0 - ro));
    out.dsout_dd = gap * (ao * B - (1.0 - ao) * A) / (-det_gamma);
    const double ds1o = gap * (-B) / det_gamma;
    const double ds2o = gap * A / det_gamma;
    out.ds1_dd = swapped ? ds2o : ds1o;
    out.ds2_dd = swapped ? ds1o : ds2o;
    return out;
}

/// Sampled diffusion-response curve with its located minimizer. d_star is a
/// finite abscissa, 0, or +infinity (sentinel) when the infimum is only
/// approached in the large-diffusion limit; s_out_min then records that limit.
struct DiffusionCurve {
    std::vector<double> d_grid;
    std::vector<double> values;
    std::vector<double> derivatives;  ///< analytic d(s_out)/dd; NaN where not defined
    double d_star = std::numeric_limits<double>::quiet_NaN();
    double s_out_min = std::numeric_limits<double>::quiet_NaN();
    bool monotone_decreasing = false;
    bool derivative_confirmed = false;  ///< linear kinetics: derivative signs agree
};

namespace analysis_detail {

struct GridMinimum {
    double x = std::numeric_limits<double>::quiet_NaN();
    double value = std::numeric_limits<double>::quiet_NaN();
    bool at_last = false;
};

/// Golden-section refinement of a grid minimum (interior or at either end).
template <class F>
GridMinimum refine_grid_minimum(F&& objective, const std::vector<double>& grid,
                                const std::vector<double>& values) {
    GridMinimum out;
    std::size_t best = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::isfinite(values[i]) && (best == grid.size() || values[i] < values[best])) {
            best = i;
        }
    }
    if (best == grid.size()) return out;
    if (best + 1 == grid.size()) {
        out.at_last = true;
        out.x = grid[best];
        out.value = values[best];
        return out;
    }
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[best + 1];
    const GoldenResult refined = golden_section_min(objective, lo, hi, 1e-8);
    if (best == 0 && values[0] <= refined.value) {
        out.x = grid[0];
        out.value = values[0];
    } else {
        out.x = refined.x;
        out.value = refined.value;
    }
    return out;
}

}  // namespace analysis_detail

/**
 * @brief Samples s_out*(d) on {0} followed by a log-spaced grid up to d_max,
 * and locates the minimizer by golden-section refinement seeded at the grid
 * minimum. With linear kinetics the analytic derivative arbitrates monotone
 * cases: all-negative derivatives mean the infimum is the large-d limit and
 * d_star is reported as the +infinity sentinel.
 *
 * Equilibrium failures propagate with the offending d attached.
 */
inline DiffusionCurve diffusion_curve(double s_in, double r, double alpha, const GrowthLaw& law,
                                      double d_max = 1e4, int n_samples = 64) {
    if (n_samples < 16) {
        throw std::invalid_argument("diffusion_curve: needs at least 16 samples");
    }
    if (!(d_max > 0.0)) {
        throw std::invalid_argument("diffusion_curve: d_max must be positive");
    }
    DiffusionCurve curve;
    const double d_lo = std::min(1e-3, d_max * 1e-3);
    curve.d_grid.push_back(0.0);
    for (int i = 0; i < n_samples - 1; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n_samples - 2);
        curve.d_grid.push_back(d_lo * std::pow(d_max / d_lo, frac));
    }

    auto solve = [&](double d) -> EquilibriumReport {
        try {
            return parallel_equilibrium(s_in, r, alpha, d, law);
        } catch (const SolveError& err) {
            std::ostringstream msg;
            msg << "diffusion_curve: equilibrium failed at d=" << d << ": " << err.what();
            throw SolveError(msg.str(), err.trace());
        }
    };

    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool all_negative = true;
    bool any_derivative = false;
    bool sign_change = false;
    double prev_derivative = nan;
    for (double d : curve.d_grid) {
        const EquilibriumReport rep = solve(d);
        curve.values.push_back(rep.s_out);
        double deriv = nan;
        if (law.is_linear() && d > 0.0 && rep.kind == EquilibriumKind::NonTrivial) {
            deriv = dsout_dd(s_in, r, alpha, d, rep, law).dsout_dd;
            any_derivative = true;
            all_negative = all_negative && deriv < 0.0;
            if (std::isfinite(prev_derivative) && prev_derivative < 0.0 && deriv > 0.0) {
                sign_change = true;
            }
            prev_derivative = deriv;
        }
        curve.derivatives.push_back(deriv);
    }

    curve.monotone_decreasing =
        law.is_linear()
            ? (any_derivative && all_negative && curve.values[0] >= curve.values[1])
            : std::is_sorted(curve.values.rbegin(), curve.values.rend());
    curve.derivative_confirmed = any_derivative && (sign_change || all_negative);

    auto objective = [&](double d) { return solve(d).s_out; };
    const auto located = analysis_detail::refine_grid_minimum(objective, curve.d_grid, curve.values);
    if (law.is_linear() && any_derivative && all_negative) {
        // Decreasing on the whole grid: the infimum is the large-d limit.
        curve.d_star = std::numeric_limits<double>::infinity();
        const std::optional<double> limit = law.inverse(1.0);
        curve.s_out_min = limit ? *limit : curve.values.back();
    } else if (located.at_last) {
        curve.d_star = std::numeric_limits<double>::infinity();
        const std::optional<double> limit = law.inverse(1.0);
        curve.s_out_min = limit ? std::min(*limit, located.value) : located.value;
    } else {
        curve.d_star = located.x;
        curve.s_out_min = located.value;
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Numeric thresholds (saturating kinetics)
// ---------------------------------------------------------------------------

namespace analysis_detail {

template <class F>
inline double bisect_monotone_crossing(F&& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        (std::signbit(fm) == std::signbit(flo) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace analysis_detail

/**
 * @brief Threshold bundle for a parallel configuration (r, alpha).
 *
 * Linear kinetics: closed forms, with crossover 2/m. Saturating kinetics:
 * each threshold is obtained by bisection on the corresponding observable
 * (zero-diffusion output crossing the single-tank baseline, the small-d slope
 * of s_out*(d) changing sign, the curve minimum crossing the baseline) and
 * the set is flagged numeric. Legs whose observable never crosses are NaN.
 */
inline ThresholdSet compute_thresholds(double r, double alpha, const GrowthLaw& law) {
    ThresholdSet out;
    if (law.is_linear()) {
        const double m = law.slope_coefficient();
        out.sin0 = threshold_sin0(r, alpha) / m;
        out.sin_lower = threshold_underline_sin(r, alpha) / m;
        out.sin_crossover = 2.0 / m;
        return out;
    }
    out.numeric = true;
    const std::optional<double> baseline = law.inverse(1.0);
    if (!baseline) {
        return out;  // no single-tank steady state to compare against
    }
    const double b = *baseline;

    auto d0_excess = [&](double s_in) {
        return parallel_equilibrium(s_in, r, alpha, 0.0, law).s_out - b;
    };
    // Zero-diffusion output is increasing in s_in; find where it crosses the baseline.
    {
        double hi = b + 1.0;
        int guard = 0;
        while (d0_excess(hi) < 0.0 && ++guard < 40) hi *= 2.0;
        if (guard < 40) {
            out.sin0 = analysis_detail::bisect_monotone_crossing(d0_excess, b * (1.0 + 1e-9), hi);
        }
    }
    // Small-d slope of s_out*(d): negative above the lower threshold.
    auto initial_slope = [&](double s_in) {
        const double h = 1e-6 * std::max(1.0, s_in);
        const double v1 = parallel_equilibrium(s_in, r, alpha, h, law).s_out;
        const double v2 = parallel_equilibrium(s_in, r, alpha, 2.0 * h, law).s_out;
        return (v2 - v1) / h;
    };
    if (std::isfinite(out.sin0)) {
        out.sin_lower = analysis_detail::bisect_monotone_crossing(
            initial_slope, b * (1.0 + 1e-6), out.sin0);
    }
    // Curve minimum crossing the baseline.
    auto min_excess = [&](double s_in) {
        const DiffusionCurve curve = diffusion_curve(s_in, r, alpha, law, 1e4, 48);
        double lowest = curve.s_out_min;
        for (double v : curve.values) lowest = std::min(lowest, v);
        return lowest - b;
    };
    {
        double hi = b + 1.0;
        int guard = 0;
        while (min_excess(hi) < -1e-12 && ++guard < 20) hi *= 2.0;
        if (guard < 20) {
            out.sin_crossover = analysis_detail::bisect_monotone_crossing(
                [&](double s) { return min_excess(s) < -1e-12 ? -1.0 : 1.0; }, b * (1.0 + 1e-6), hi);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// One swept curve: s_out* against the grid for a fixed input concentration.
/// Cells that are skipped (outside the domain) or failed hold NaN.
struct SweepSeries {
    double s_in = 0.0;
    std::vector<double> values;
    std::vector<EquilibriumKind> kinds;
    double d_star = std::numeric_limits<double>::quiet_NaN();   ///< parallel sweeps only
    double s_out_min = std::numeric_limits<double>::quiet_NaN();
};

struct SweepFlag {
    double s_in = 0.0;
    double param = 0.0;
    std::string note;
};

struct SweepResult {
    std::string param_name;  ///< "r" (serial) or "d" (parallel)
    std::vector<double> grid;
    std::vector<SweepSeries> series;
    std::vector<SweepFlag> flagged;
    GrowthLaw law = GrowthLaw::linear(1.0);
    // Parallel sweep context:
    double r = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    std::optional<ThresholdSet> thresholds;
};

/**
 * @brief Serial-cascade sweep: s_out* as a function of the first-tank volume
 * fraction r, one series per input concentration.
 *
 * The grid is clipped per series to the survival region mu(s_in) > 1/r of the
 * first compartment (r in (1/s_in, 1) for unit-slope linear kinetics); cells
 * outside are NaN. Partial-washout cells are recorded and flagged, not
 * dropped.
 */
inline SweepResult sweep_serial(const std::vector<double>& s_in_list,
                                const std::vector<double>& r_grid, const GrowthLaw& law,
                                unsigned jobs = 1) {
    if (s_in_list.empty() || r_grid.empty()) {
        throw std::invalid_argument("sweep_serial: grids must be non-empty");
    }
    SweepResult result;
    result.param_name = "r";
    result.grid = r_grid;
    result.law = law;
    result.series.resize(s_in_list.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t s = 0; s < s_in_list.size(); ++s) {
        result.series[s].s_in = s_in_list[s];
        result.series[s].values.assign(r_grid.size(), nan);
        result.series[s].kinds.assign(r_grid.size(), EquilibriumKind::Washout);
    }
    std::vector<std::vector<std::string>> notes(s_in_list.size(),
                                                std::vector<std::string>(r_grid.size()));
    parallel_for(s_in_list.size() * r_grid.size(), jobs, [&](std::size_t idx) {
        const std::size_t s = idx / r_grid.size();
        const std::size_t i = idx % r_grid.size();
        const double s_in = s_in_list[s];
        const double r = r_grid[i];
        if (!(r > 0.0 && r < 1.0) || !(law.rate_unchecked(s_in) * r > 1.0)) {
            return;  // outside the first-compartment survival region
        }
        try {
            const EquilibriumReport rep = serial_equilibrium(s_in, r, law);
            result.series[s].values[i] = rep.s_out;
            result.series[s].kinds[i] = rep.kind;
            if (rep.flagged) notes[s][i] = rep.note;
        } catch (const SolveError& err) {
            notes[s][i] = err.what();
        }
    });
    for (std::size_t s = 0; s < s_in_list.size(); ++s) {
        for (std::size_t i = 0; i < r_grid.size(); ++i) {
            if (!notes[s][i].empty()) {
                result.flagged.push_back({s_in_list[s], r_grid[i], notes[s][i]});
            }
        }
    }
    return result;
}

/**
 * @brief Parallel-configuration sweep: s_out* as a function of the diffusion
 * rate d at fixed (r, alpha), one series per input concentration. Each series
 * also reports its refined minimizer (d_star, s_out_min), and the threshold
 * bundle for (r, alpha) is attached.
 */
inline SweepResult sweep_parallel(const std::vector<double>& s_in_list,
                                  const std::vector<double>& d_grid, double r, double alpha,
                                  const GrowthLaw& law, unsigned jobs = 1) {
    if (s_in_list.empty() || d_grid.empty()) {
        throw std::invalid_argument("sweep_parallel: grids must be non-empty");
    }
    SweepResult result;
    result.param_name = "d";
    result.grid = d_grid;
    result.law = law;
    result.r = r;
    result.alpha = alpha;
    result.series.resize(s_in_list.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t s = 0; s < s_in_list.size(); ++s) {
        result.series[s].s_in = s_in_list[s];
        result.series[s].values.assign(d_grid.size(), nan);
        result.series[s].kinds.assign(d_grid.size(), EquilibriumKind::Washout);
    }
    std::vector<std::vector<std::string>> notes(s_in_list.size(),
                                                std::vector<std::string>(d_grid.size()));
    parallel_for(s_in_list.size() * d_grid.size(), jobs, [&](std::size_t idx) {
        const std::size_t s = idx / d_grid.size();
        const std::size_t i = idx % d_grid.size();
        try {
            const EquilibriumReport rep =
                parallel_equilibrium(s_in_list[s], r, alpha, d_grid[i], law);
            result.series[s].values[i] = rep.s_out;
            result.series[s].kinds[i] = rep.kind;
            if (rep.flagged) notes[s][i] = rep.note;
        } catch (const SolveError& err) {
            notes[s][i] = err.what();
        }
    });
    for (std::size_t s = 0; s < s_in_list.size(); ++s) {
        for (std::size_t i = 0; i < d_grid.size(); ++i) {
            if (!notes[s][i].empty()) {
                result.flagged.push_back({s_in_list[s], d_grid[i], notes[s][i]});
            }
        }
        auto objective = [&](double d) {
            return parallel_equilibrium(s_in_list[s], r, alpha, d, law).s_out;
        };
        const auto located =
            analysis_detail::refine_grid_minimum(objective, d_grid, result.series[s].values);
        if (located.at_last) {
            result.series[s].d_star = std::numeric_limits<double>::infinity();
            const std::optional<double> limit = law.inverse(1.0);
            result.series[s].s_out_min = limit ? std::min(*limit, located.value) : located.value;
        } else {
            result.series[s].d_star = located.x;
            result.series[s].s_out_min = located.value;
        }
    }
    result.thresholds = compute_thresholds(r, alpha, law);
    return result;
}

// ---------------------------------------------------------------------------
// Cross-configuration comparison
// ---------------------------------------------------------------------------

enum class CompareVerdict { SerialWins, ParallelWins, SingleOrTie };

inline const char* to_string(CompareVerdict verdict) {
    switch (verdict) {
        case CompareVerdict::SerialWins: return "serial-wins";
        case CompareVerdict::ParallelWins: return "parallel-wins";
        case CompareVerdict::SingleOrTie: return "single-wins/tie";
    }
    return "?";
}

struct FamilyBest {
    double s_out = std::numeric_limits<double>::infinity();
    double r = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double d = std::numeric_limits<double>::quiet_NaN();
    bool valid = false;
};

struct ComparisonReport {
    double s_in = 0.0;
    double baseline = 0.0;  ///< single-tank steady-state output
    FamilyBest serial;
    FamilyBest parallel;
    CompareVerdict verdict = CompareVerdict::SingleOrTie;
    /// True when the winning parallel point needs d > 0 to beat the baseline
    /// (its zero-diffusion output is not already below it).
    bool parallel_requires_diffusion = false;
};

/**
 * @brief Best achievable steady-state output of each configuration family
 * over the supplied grids, and the verdict against the single tank.
 */
inline ComparisonReport compare_configurations(double s_in, const GrowthLaw& law,
                                               const std::vector<double>& r_grid,
                                               const std::vector<double>& alpha_grid,
                                               const std::vector<double>& d_grid,
                                               unsigned jobs = 1) {
    if (r_grid.empty() || alpha_grid.empty() || d_grid.empty()) {
        throw std::invalid_argument("compare_configurations: grids must be non-empty");
    }
    ComparisonReport report;
    report.s_in = s_in;
    report.baseline = single_equilibrium(s_in, law).s_out;

    // Serial family over the r grid.
    {
        std::vector<double> values(r_grid.size(), std::numeric_limits<double>::quiet_NaN());
        parallel_for(r_grid.size(), jobs, [&](std::size_t i) {
            const double r = r_grid[i];
            if (!(r > 0.0 && r < 1.0)) return;
            try {
                values[i] = serial_equilibrium(s_in, r, law).s_out;
            } catch (const SolveError&) {
            }
        });
        for (std::size_t i = 0; i < r_grid.size(); ++i) {
            if (std::isfinite(values[i]) && values[i] < report.serial.s_out) {
                report.serial = {values[i], r_grid[i],
                                 std::numeric_limits<double>::quiet_NaN(),
                                 std::numeric_limits<double>::quiet_NaN(), true};
            }
        }
    }

    // Parallel family over the (r, alpha, d) cube.
    {
        const std::size_t count = r_grid.size() * alpha_grid.size() * d_grid.size();
        std::vector<double> values(count, std::numeric_limits<double>::quiet_NaN());
        parallel_for(count, jobs, [&](std::size_t idx) {
            const std::size_t di = idx % d_grid.size();
            const std::size_t ai = (idx / d_grid.size()) % alpha_grid.size();
            const std::size_t ri = idx / (d_grid.size() * alpha_grid.size());
            const double r = r_grid[ri];
            const double alpha = alpha_grid[ai];
            if (!(r > 0.0 && r < 1.0) || !(alpha >= 0.0 && alpha <= 1.0)) return;
            try {
                values[idx] = parallel_equilibrium(s_in, r, alpha, d_grid[di], law).s_out;
            } catch (const SolveError&) {
            }
        });
        for (std::size_t idx = 0; idx < count; ++idx) {
            if (std::isfinite(values[idx]) && values[idx] < report.parallel.s_out) {
                const std::size_t di = idx % d_grid.size();
                const std::size_t ai = (idx / d_grid.size()) % alpha_grid.size();
                const std::size_t ri = idx / (d_grid.size() * alpha_grid.size());
                report.parallel = {values[idx], r_grid[ri], alpha_grid[ai], d_grid[di], true};
            }
        }
    }

    constexpr double tie_tol = 1e-9;
    const bool serial_beats = report.serial.valid && report.serial.s_out < report.baseline - tie_tol;
    const bool parallel_beats =
        report.parallel.valid && report.parallel.s_out < report.baseline - tie_tol;
    if (serial_beats && (!parallel_beats || report.serial.s_out <= report.parallel.s_out)) {
        report.verdict = CompareVerdict::SerialWins;
    } else if (parallel_beats) {
        report.verdict = CompareVerdict::ParallelWins;
    } else {
        report.verdict = CompareVerdict::SingleOrTie;
    }
    if (report.parallel.valid) {
        const double at_zero =
            parallel_equilibrium(s_in, report.parallel.r, report.parallel.alpha, 0.0, law).s_out;
        report.parallel_requires_diffusion = !(at_zero < report.baseline - tie_tol);
    }
    return report;
}

/// Uniform grid helpers used by the CLI defaults.
inline std::vector<double> linear_grid(double lo, double hi, int count) {
    if (count < 2 || !(hi > lo)) {
        throw std::invalid_argument("linear_grid: needs count >= 2 and hi > lo");
    }
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return grid;
}

inline std::vector<double> log_grid(double lo, double hi, int count) {
    if (count < 2 || !(lo > 0.0) || !(hi > lo)) {
        throw std::invalid_argument("log_grid: needs count >= 2 and hi > lo > 0");
    }
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(count - 1);
        grid[i] = lo * std::pow(hi / lo, frac);
    }
    return grid;
}

}  // namespace chemnet
