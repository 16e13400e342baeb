#pragma once

/**
 * @file equilibrium.hpp
 * @brief Steady states of the three tank configurations.
 *
 * Closed forms are used where they exist (single tank, first compartment of
 * the cascade, uncoupled parallel tanks at d = 0). The remaining scalar
 * equations are solved by a uniform sign scan plus bisection, then polished
 * by Newton iterations in extended precision so the reported states zero the
 * vector field to well below the 1e-9 residual gate.
 *
 * For the parallel configuration with diffusion the working object is the
 * pair of coupling maps
 *
 *   phi2(s1) = s1 + (r/d)   (s_in - s1)(mu(s1) - a1)
 *   phi1(s2) = s2 + ((1-r)/d)(s_in - s2)(mu(s2) - a2)
 *
 * whose composition defect g(s1) = phi1(phi2(s1)) - s1 vanishes exactly at
 * the coupled steady state. With linear kinetics g has a unique interior zero
 * with g' > 0 between a1 and min(a2, s_in); with saturating kinetics
 * uniqueness is not guaranteed, so every sign change is located and reported.
 */

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chemnet/growth.hpp"
#include "chemnet/model.hpp"
#include "chemnet/solvers.hpp"

namespace chemnet {

enum class EquilibriumKind { NonTrivial, Washout, Tank1Washout };

inline const char* to_string(EquilibriumKind kind) {
    switch (kind) {
        case EquilibriumKind::NonTrivial: return "non-trivial";
        case EquilibriumKind::Washout: return "washout";
        case EquilibriumKind::Tank1Washout: return "partial-washout";
    }
    return "?";
}

/**
 * @brief A located steady state together with its numerical certificates.
 *
 * kind NonTrivial means every component of the state is positive; Washout is
 * the trivial equilibrium (all biomass zero); Tank1Washout flags a partial
 * washout (one compartment below its survival threshold, the report carries
 * the attracting cascade/per-tank values).
 */
struct EquilibriumReport {
    Configuration config = Configuration::single_tank();
    double s_in = 0.0;
    EquilibriumKind kind = EquilibriumKind::Washout;
    NetworkState state;        ///< steady-state concentrations
    double s_out = 0.0;        ///< steady-state output concentration
    double residual = 0.0;     ///< max-norm of the vector field at state
    bool flagged = false;      ///< partial washout, unsolvable growth, multiple roots
    std::string note;

    // Root certificates of the parallel solve (NaN when not applicable).
    double g_residual = std::numeric_limits<double>::quiet_NaN();
    double g_prime = std::numeric_limits<double>::quiet_NaN();
    int root_count = 0;                 ///< interior sign changes found by the scan
    std::vector<double> extra_roots;    ///< additional s1 roots (saturating kinetics only)

    bool has_biomass() const { return state.x1 > 0.0 || (state.compartments() == 2 && state.x2 > 0.0); }
};

/**
 * @brief Evaluators for the coupling maps phi1, phi2 and their composition
 * defect g at fixed (s_in, r, alpha, d, law). Requires d > 0.
 *
 * Compartment labels are taken as given (no orientation swap); a1 = alpha/r,
 * a2 = (1-alpha)/(1-r). Methods are templated so the solvers can evaluate in
 * extended precision. The *_increment forms return phi - identity without
 * cancellation, which keeps residuals small when d is large.
 */
class CouplingMaps {
public:
    CouplingMaps(double s_in, double r, double alpha, double d, const GrowthLaw& law)
        : s_in_(s_in), r_(r), d_(d), a1_(alpha / r), a2_((1.0 - alpha) / (1.0 - r)), law_(law) {
        if (!(d > 0.0)) {
            throw std::invalid_argument("CouplingMaps: requires d > 0 (maps are undefined at d = 0)");
        }
        if (!(r > 0.0 && r < 1.0)) {
            throw std::invalid_argument("CouplingMaps: requires r strictly in (0, 1)");
        }
    }

    double alpha1() const { return a1_; }
    double alpha2() const { return a2_; }
    double s_in() const { return s_in_; }

    template <class T>
    T phi2_increment(T s1) const {
        return static_cast<T>(r_) / static_cast<T>(d_) * (static_cast<T>(s_in_) - s1) *
               (law_.rate_unchecked(s1) - static_cast<T>(a1_));
    }

    template <class T>
    T phi1_increment(T s2) const {
        return (T(1) - static_cast<T>(r_)) / static_cast<T>(d_) * (static_cast<T>(s_in_) - s2) *
               (law_.rate_unchecked(s2) - static_cast<T>(a2_));
    }

    template <class T>
    T phi2(T s1) const { return s1 + phi2_increment(s1); }

    template <class T>
    T phi1(T s2) const { return s2 + phi1_increment(s2); }

    /// Composition defect g(s1) = phi1(phi2(s1)) - s1.
    template <class T>
    T g(T s1) const { return phi1(phi2(s1)) - s1; }

    template <class T>
    T phi2_prime(T s1) const {
        return T(1) + static_cast<T>(r_) / static_cast<T>(d_) *
                          ((static_cast<T>(s_in_) - s1) * law_.derivative(s1) -
                           (law_.rate_unchecked(s1) - static_cast<T>(a1_)));
    }

    template <class T>
    T phi1_prime(T s2) const {
        return T(1) + (T(1) - static_cast<T>(r_)) / static_cast<T>(d_) *
                          ((static_cast<T>(s_in_) - s2) * law_.derivative(s2) -
                           (law_.rate_unchecked(s2) - static_cast<T>(a2_)));
    }

    template <class T>
    T g_prime(T s1) const {
        return phi1_prime(phi2(s1)) * phi2_prime(s1) - T(1);
    }

    /// Central-difference derivative of g, the certificate form used in reports.
    double g_prime_central(double s1, double h = 1e-6) const {
        return (g(s1 + h) - g(s1 - h)) / (2.0 * h);
    }

private:
    double s_in_, r_, d_, a1_, a2_;
    GrowthLaw law_;
};

/**
 * @brief Certified bracket (lo, hi) containing the physical zero of g.
 *
 * Labels must already be oriented so a2 >= a1. The lower end is where the
 * first compartment stops consuming, mu^{-1}(a1). The upper end combines
 * three constraints on the root: s1* < mu^{-1}(a2) (ordering), s1* < s_in
 * (positive biomass in compartment 1), and phi2(s1*) = s2* <= s_in (positive
 * biomass in compartment 2), which is equivalent to s1* <= mu^{-1}(a1 + d/r).
 * The last cap matters at small d: without it the composition g acquires
 * spurious zeros whose phi2 image lies outside the physical domain.
 */
inline std::pair<double, double> parallel_root_bracket(double s_in, double r, double alpha,
                                                       double d, const GrowthLaw& law) {
    const double a1 = alpha / r;
    const double a2 = (1.0 - alpha) / (1.0 - r);
    const std::optional<double> inv1 = law.inverse(a1);
    const std::optional<double> inv2 = law.inverse(a2);
    const std::optional<double> cap = law.inverse(a1 + d / r);
    const double lo = inv1 ? *inv1 : 0.0;
    double hi = std::min(inv2 ? *inv2 : s_in, s_in);
    if (cap) hi = std::min(hi, *cap);
    return {lo, hi};
}

namespace equilibrium_detail {

/// Bisection seed refined by damped Newton in extended precision.
template <class F, class FPrime>
inline long double refine_root(F&& f, FPrime&& fprime, double lo, double hi) {
    const double seed = bisect([&](double x) { return static_cast<double>(f(static_cast<long double>(x))); }, lo, hi);
    long double x = seed;
    long double fx = f(x);
    for (int it = 0; it < 64 && fx != 0.0L; ++it) {
        const long double dfx = fprime(x);
        if (dfx == 0.0L || !std::isfinite(static_cast<double>(dfx))) break;
        long double step = fx / dfx;
        long double xn = x - step;
        if (xn < lo) xn = (x + lo) / 2;
        if (xn > hi) xn = (x + hi) / 2;
        const long double fn = f(xn);
        if (std::fabs(fn) >= std::fabs(fx)) break;
        x = xn;
        fx = fn;
        if (std::fabs(step) <= 1e-19L * std::max<long double>(1.0L, std::fabs(x))) break;
    }
    return x;
}

inline EquilibriumReport finalize(EquilibriumReport report, const GrowthLaw& law) {
    report.residual = field_norm(report.config, law, report.state, report.s_in);
    return report;
}

}  // namespace equilibrium_detail

/// Trivial equilibrium: all substrate at s_in, no biomass, s_out = s_in.
inline EquilibriumReport washout_equilibrium(const Configuration& config, double s_in) {
    if (!(s_in >= 0.0)) {
        throw std::invalid_argument("washout_equilibrium: s_in must be non-negative");
    }
    EquilibriumReport report;
    report.config = config;
    report.s_in = s_in;
    report.kind = EquilibriumKind::Washout;
    report.state = config.compartments() == 1 ? NetworkState::single(s_in, 0.0)
                                              : NetworkState::pair(s_in, 0.0, s_in, 0.0);
    report.s_out = s_in;
    report.residual = 0.0;  // the field vanishes identically on the washout manifold
    return report;
}

/**
 * @brief Steady state of the single perfectly mixed tank.
 *
 * The non-trivial equilibrium is s* with mu(s*) = 1 (the dilution rate) and
 * x* = s_in - s*; it exists exactly when s* < s_in. With linear unit-slope
 * kinetics this is (1, s_in - 1) for s_in > 1. When mu never reaches the
 * dilution rate (saturating kinetics with mu_max <= 1) the washout is
 * reported flagged.
 */
inline EquilibriumReport single_equilibrium(double s_in, const GrowthLaw& law) {
    if (!(s_in > 0.0)) {
        throw std::invalid_argument("single_equilibrium: s_in must be positive");
    }
    EquilibriumReport report;
    report.config = Configuration::single_tank();
    report.s_in = s_in;

    const std::optional<double> s_star = law.inverse(1.0);
    if (!s_star) {
        report = washout_equilibrium(report.config, s_in);
        report.flagged = true;
        report.note = "growth rate never reaches the dilution rate; washout is the only steady state";
        return report;
    }
    if (*s_star < s_in) {
        report.kind = EquilibriumKind::NonTrivial;
        report.state = NetworkState::single(*s_star, s_in - *s_star);
        report.s_out = *s_star;
        return equilibrium_detail::finalize(report, law);
    }
    report = washout_equilibrium(report.config, s_in);
    return report;
}

/**
 * @brief Steady state of the two-tank cascade.
 *
 * The first compartment behaves as a standalone tank with dilution 1/r:
 * s1* solves mu(s1) = 1/r and is non-trivial exactly when s1* < s_in. The
 * second-compartment substrate then solves
 *
 *   mu(s2) (s_in - s2) = (s1* - s2) / (1 - r)
 *
 * on (0, s1*), located by a 64-interval sign scan plus bisection and polished
 * by Newton. When the first tank washes out the second is treated as a
 * standalone tank with dilution 1/(1-r) and the result is flagged
 * Tank1Washout rather than rejected, because parameter sweeps legitimately
 * cross that boundary.
 */
inline EquilibriumReport serial_equilibrium(double s_in, double r, const GrowthLaw& law) {
    if (!(s_in > 0.0)) {
        throw std::invalid_argument("serial_equilibrium: s_in must be positive");
    }
    const Configuration config = Configuration::serial(r);

    EquilibriumReport report;
    report.config = config;
    report.s_in = s_in;

    const std::optional<double> s1_star = law.inverse(1.0 / r);
    if (!s1_star || !(*s1_star < s_in)) {
        // First compartment washed out; cascade the inflow s_in into tank 2.
        report.kind = EquilibriumKind::Tank1Washout;
        report.flagged = true;
        const std::optional<double> s2_alone = law.inverse(1.0 / (1.0 - r));
        if (s2_alone && *s2_alone < s_in) {
            report.state = NetworkState::pair(s_in, 0.0, *s2_alone, s_in - *s2_alone);
            report.note = "first compartment washed out; second sustains as a standalone tank";
        } else {
            report.state = NetworkState::pair(s_in, 0.0, s_in, 0.0);
            report.note = "both compartments washed out (dilution exceeds growth at s_in)";
        }
        report.s_out = report.state.s2;
        return equilibrium_detail::finalize(report, law);
    }

    const double s1 = *s1_star;
    const double upper = std::min(s1, s_in);
    auto h = [&](long double s2) {
        return (1.0L - static_cast<long double>(r)) * law.rate_unchecked(s2) *
                   (static_cast<long double>(s_in) - s2) -
               (static_cast<long double>(s1) - s2);
    };
    auto h_prime = [&](long double s2) {
        return (1.0L - static_cast<long double>(r)) *
                   (law.derivative(s2) * (static_cast<long double>(s_in) - s2) -
                    law.rate_unchecked(s2)) +
               1.0L;
    };
    auto h_double = [&](double s2) { return static_cast<double>(h(static_cast<long double>(s2))); };

    const double eps = 1e-12 * std::max(1.0, s_in);
    std::vector<ScanSample> trace;
    const auto brackets = scan_sign_changes(h_double, eps, upper - eps, 64, &trace);
    if (brackets.empty()) {
        throw SolveError("serial_equilibrium: no sign change for the second-compartment root", trace);
    }
    if (brackets.size() > 1) {
        report.flagged = true;
        report.note = "multiple candidate steady states for compartment 2; reporting the smallest";
    }
    const long double s2l =
        equilibrium_detail::refine_root(h, h_prime, brackets.front().lo, brackets.front().hi);
    const double s2 = static_cast<double>(s2l);
    report.root_count = static_cast<int>(brackets.size());
    for (std::size_t i = 1; i < brackets.size(); ++i) {
        report.extra_roots.push_back(static_cast<double>(
            equilibrium_detail::refine_root(h, h_prime, brackets[i].lo, brackets[i].hi)));
    }

    if (law.is_linear()) {
        // Certified bound for linear kinetics.
        if (!(s2 < std::min(1.0 / (law.slope_coefficient() * r),
                            1.0 / (law.slope_coefficient() * (1.0 - r))) + eps)) {
            throw std::logic_error("serial_equilibrium: root violates the certified bound");
        }
    }

    report.kind = EquilibriumKind::NonTrivial;
    report.state = NetworkState::pair(s1, s_in - s1, s2, s_in - s2);
    report.s_out = s2;
    return equilibrium_detail::finalize(report, law);
}

/**
 * @brief Steady state of the parallel configuration with diffusion.
 *
 * At d = 0 the compartments decouple into standalone tanks with dilution
 * rates a_i, giving s_i* = min(mu^{-1}(a_i), s_in) in closed form. For d > 0
 * the labels are oriented so a2 >= a1, the zero of g is bracketed on the
 * certified interval of parallel_root_bracket (shrunk by
 * eps = 1e-10 * max(1, s_in) at each end; the shrink at s_in excludes the
 * trivial root g(s_in) = 0), refined to |g| <= 1e-12, and the orientation is
 * undone before reporting. s_out* = alpha*s1* + (1-alpha)*s2*.
 *
 * With linear kinetics and s_in > 1 a missing sign change is a solver defect
 * and raises SolveError carrying the scan trace; it is never silently
 * reported as washout. With saturating kinetics uniqueness is unproven, so
 * all sign changes are located; extra roots are reported and flagged.
 */
inline EquilibriumReport parallel_equilibrium(double s_in, double r, double alpha, double d,
                                              const GrowthLaw& law) {
    if (!(s_in > 0.0)) {
        throw std::invalid_argument("parallel_equilibrium: s_in must be positive");
    }
    const Configuration config = Configuration::parallel(r, alpha, d);

    EquilibriumReport report;
    report.config = config;
    report.s_in = s_in;

    // Work in the orientation with a2 >= a1 (swap compartment labels if needed).
    const bool swapped = alpha > r;
    const double ro = swapped ? 1.0 - r : r;
    const double ao = swapped ? 1.0 - alpha : alpha;

    auto deliver = [&](double s1o, double x1o, double s2o, double x2o,
                       EquilibriumKind kind) -> EquilibriumReport& {
        report.kind = kind;
        report.state = swapped ? NetworkState::pair(s2o, x2o, s1o, x1o)
                               : NetworkState::pair(s1o, x1o, s2o, x2o);
        report.s_out = alpha * report.state.s1 + (1.0 - alpha) * report.state.s2;
        return report;
    };

    if (d == 0.0) {
        // Uncoupled tanks: each is a standalone chemostat with dilution a_i.
        const double a[2] = {ao / ro, (1.0 - ao) / (1.0 - ro)};
        double s[2], x[2];
        for (int i = 0; i < 2; ++i) {
            const std::optional<double> inv = law.inverse(a[i]);
            s[i] = inv ? std::min(*inv, s_in) : s_in;
            x[i] = s_in - s[i];
        }
        const bool washed1 = x[0] <= 0.0;
        const bool washed2 = x[1] <= 0.0;
        EquilibriumKind kind = EquilibriumKind::NonTrivial;
        if (washed1 && washed2) {
            kind = EquilibriumKind::Washout;
        } else if (washed1 || washed2) {
            kind = EquilibriumKind::Tank1Washout;
            report.flagged = true;
            report.note = "one uncoupled compartment washed out (d = 0)";
        }
        deliver(s[0], x[0], s[1], x[1], kind);
        return equilibrium_detail::finalize(report, law);
    }

    if (law.is_linear() && !(law.slope_coefficient() * s_in > 1.0)) {
        report = washout_equilibrium(config, s_in);
        report.flagged = true;
        report.note = "input concentration at or below the network survival threshold";
        return report;
    }

    const CouplingMaps maps(s_in, ro, ao, d, law);
    const double a1 = maps.alpha1();
    const double a2 = maps.alpha2();

    if (a1 == a2) {
        // Equal dilution rates: the symmetric steady state solves mu(s) = 1.
        const std::optional<double> s_star = law.inverse(1.0);
        if (!s_star || !(*s_star < s_in)) {
            report = washout_equilibrium(config, s_in);
            report.flagged = true;
            report.note = "growth cannot sustain the symmetric steady state";
            return report;
        }
        deliver(*s_star, s_in - *s_star, *s_star, s_in - *s_star, EquilibriumKind::NonTrivial);
        report.root_count = 1;
        report.g_residual = std::abs(maps.g(*s_star));
        report.g_prime = maps.g_prime_central(*s_star);
        return equilibrium_detail::finalize(report, law);
    }

    const auto [lo0, hi0] = parallel_root_bracket(s_in, ro, ao, d, law);
    // The shrink at the upper end excludes the trivial root g(s_in) = 0; it is
    // reduced when the bracket itself is nearly degenerate (a2 close to a1).
    const double eps = std::min(1e-10 * std::max(1.0, s_in), (hi0 - lo0) / 64.0);
    const double lo = lo0 + eps;
    const double hi = hi0 - eps;

    auto g_double = [&](double s) { return static_cast<double>(maps.g(static_cast<long double>(s))); };
    std::vector<ScanSample> trace;
    std::vector<SignChange> brackets;
    if (hi > lo) {
        brackets = scan_sign_changes(g_double, lo, hi, law.is_linear() ? 64 : 512, &trace);
    }
    if (brackets.empty()) {
        if (law.is_linear()) {
            std::ostringstream msg;
            msg << "parallel_equilibrium: no interior sign change of g on (" << lo << ", " << hi
                << ") at s_in=" << s_in << ", r=" << r << ", alpha=" << alpha << ", d=" << d;
            throw SolveError(msg.str(), trace);
        }
        report = washout_equilibrium(config, s_in);
        report.flagged = true;
        report.note = "no interior zero of the coupling defect located; reporting washout";
        return report;
    }

    auto g_l = [&](long double s) { return maps.g(s); };
    auto gp_l = [&](long double s) { return maps.g_prime(s); };
    const long double s1l = equilibrium_detail::refine_root(g_l, gp_l, brackets.front().lo,
                                                            brackets.front().hi);
    const long double s2l = s1l + maps.phi2_increment(s1l);
    const double s1o = static_cast<double>(s1l);
    const double s2o = static_cast<double>(s2l);

    report.root_count = static_cast<int>(brackets.size());
    if (brackets.size() > 1) {
        report.flagged = true;
        report.note = "multiple interior zeros of the coupling defect; reporting the smallest";
        for (std::size_t i = 1; i < brackets.size(); ++i) {
            report.extra_roots.push_back(static_cast<double>(
                equilibrium_detail::refine_root(g_l, gp_l, brackets[i].lo, brackets[i].hi)));
        }
    }

    deliver(s1o, s_in - s1o, s2o, s_in - s2o, EquilibriumKind::NonTrivial);
    report.g_residual = static_cast<double>(std::fabs(maps.g(s1l)));
    report.g_prime = maps.g_prime_central(s1o);
    return equilibrium_detail::finalize(report, law);
}

/// Dispatch on the configuration kind.
inline EquilibriumReport solve_equilibrium(const Configuration& config, const GrowthLaw& law,
                                           double s_in) {
    switch (config.kind()) {
        case ConfigKind::SingleTank: return single_equilibrium(s_in, law);
        case ConfigKind::Serial: return serial_equilibrium(s_in, config.r(), law);
        case ConfigKind::ParallelDiffusion:
            return parallel_equilibrium(s_in, config.r(), config.alpha(), config.d(), law);
    }
    throw std::logic_error("solve_equilibrium: unreachable");
}

}  // namespace chemnet
