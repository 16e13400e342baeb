#pragma once

/**
 * @file growth.hpp
 * @brief Specific growth laws for the compartment models.
 *
 * Two kinetics are supported: linear (mu(s) = m*s) and Monod saturation
 * kinetics (mu(s) = mu_max*s / (K + s)). Both vanish at s = 0 and are
 * strictly increasing on [0, inf), which the steady-state solvers rely on.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace chemnet {

enum class GrowthKind { Linear, Monod };

class GrowthLaw {
public:
    /// Linear kinetics mu(s) = slope * s. Requires slope > 0.
    static GrowthLaw linear(double slope) {
        if (!(slope > 0.0)) {
            throw std::invalid_argument("GrowthLaw::linear: slope must be positive");
        }
        return GrowthLaw(GrowthKind::Linear, slope, 0.0);
    }

    /// Monod kinetics mu(s) = mu_max * s / (K + s). Requires mu_max > 0, K > 0.
    static GrowthLaw monod(double mu_max, double half_saturation) {
        if (!(mu_max > 0.0) || !(half_saturation > 0.0)) {
            throw std::invalid_argument("GrowthLaw::monod: mu_max and K must be positive");
        }
        return GrowthLaw(GrowthKind::Monod, mu_max, half_saturation);
    }

    GrowthKind kind() const { return kind_; }
    bool is_linear() const { return kind_ == GrowthKind::Linear; }

    /// Linear slope m (Linear only).
    double slope_coefficient() const { return a_; }
    /// Maximum growth rate (Monod only).
    double mu_max() const { return a_; }
    /// Half-saturation concentration K (Monod only).
    double half_saturation() const { return b_; }

    /// Growth rate mu(s). Rejects negative concentrations.
    double rate(double s) const {
        if (!(s >= 0.0)) {
            throw std::invalid_argument("GrowthLaw::rate: concentration must be non-negative");
        }
        return rate_unchecked(s);
    }

    /// mu(s) without the domain check; templated so solvers can evaluate in
    /// extended precision.
    template <class T>
    T rate_unchecked(T s) const {
        if (kind_ == GrowthKind::Linear) {
            return static_cast<T>(a_) * s;
        }
        return static_cast<T>(a_) * s / (static_cast<T>(b_) + s);
    }

    /// Derivative mu'(s); positive everywhere on [0, inf).
    template <class T>
    T derivative(T s) const {
        if (kind_ == GrowthKind::Linear) {
            return static_cast<T>(a_);
        }
        const T denom = static_cast<T>(b_) + s;
        return static_cast<T>(a_) * static_cast<T>(b_) / (denom * denom);
    }

    /// Supremum of mu over [0, inf): unbounded for linear, mu_max for Monod.
    double supremum() const {
        return kind_ == GrowthKind::Linear ? std::numeric_limits<double>::infinity() : a_;
    }

    /**
     * @brief Solves mu(s) = target on [0, inf) by monotone bisection.
     *
     * Returns nullopt when the equation has no solution (target at or above
     * the supremum of mu). The bisection runs to floating-point resolution,
     * well inside the 1e-12 gates used by the equilibrium solvers.
     */
    std::optional<double> inverse(double target) const {
        if (!(target >= 0.0)) {
            throw std::invalid_argument("GrowthLaw::inverse: target rate must be non-negative");
        }
        if (target == 0.0) {
            return 0.0;
        }
        if (!(target < supremum())) {
            return std::nullopt;
        }
        double lo = 0.0;
        double hi = 1.0;
        int guard = 0;
        while (rate_unchecked(hi) < target) {
            hi *= 2.0;
            if (++guard > 1024) {
                return std::nullopt;  // cannot happen for valid laws
            }
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) {
                break;
            }
            (rate_unchecked(mid) < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    GrowthLaw(GrowthKind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

    GrowthKind kind_;
    double a_;  // slope m (Linear) or mu_max (Monod)
    double b_;  // half-saturation K (Monod)
};

}  // namespace chemnet
