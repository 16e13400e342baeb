#pragma once

/**
 * @file model.hpp
 * @brief Tank configurations, dimensionless scaling and the ODE vector fields.
 *
 * Three configurations of a continuous-culture system with fixed total volume
 * V and flow rate Q are modelled:
 *
 *   - SingleTank: one perfectly mixed compartment,
 *   - Serial:     two compartments in cascade, the first holding a volume
 *                 fraction r of the total,
 *   - ParallelDiffusion: two compartments in parallel, a fraction alpha of
 *                 the inflow routed to the first, exchanging by diffusion
 *                 rate d (alpha = 0 is the dead-zone model).
 *
 * Everything here works in dimensionless units: concentrations are scaled by
 * the growth slope at the origin times V/Q, and time is scaled so the total
 * dilution rate is one. State layout is fixed as (s1, x1, s2, x2).
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "chemnet/growth.hpp"

namespace chemnet {

enum class ConfigKind { SingleTank, Serial, ParallelDiffusion };

/// Dimensionless configuration parameters. Construct through the factories,
/// which enforce r in (0,1) strictly, alpha in [0,1] and d >= 0.
class Configuration {
public:
    static Configuration single_tank() { return Configuration(ConfigKind::SingleTank, 0.0, 0.0, 0.0); }

    static Configuration serial(double r) {
        check_r(r);
        return Configuration(ConfigKind::Serial, r, 0.0, 0.0);
    }

    static Configuration parallel(double r, double alpha, double d) {
        check_r(r);
        if (!(alpha >= 0.0 && alpha <= 1.0)) {
            throw std::invalid_argument("Configuration: alpha must lie in [0, 1]");
        }
        if (!(d >= 0.0)) {
            throw std::invalid_argument("Configuration: diffusion rate d must be non-negative");
        }
        return Configuration(ConfigKind::ParallelDiffusion, r, alpha, d);
    }

    /// Dead zone of volume fraction r exchanging with the fed compartment by
    /// diffusion only (no direct inflow).
    static Configuration dead_zone(double r, double d) { return parallel(r, 0.0, d); }

    ConfigKind kind() const { return kind_; }
    double r() const { return r_; }
    double alpha() const { return alpha_; }
    double d() const { return d_; }

    std::size_t compartments() const { return kind_ == ConfigKind::SingleTank ? 1 : 2; }
    std::size_t dimension() const { return 2 * compartments(); }

    /// Per-compartment dilution rates alpha1 = alpha/r, alpha2 = (1-alpha)/(1-r)
    /// of the parallel configuration; they satisfy r*alpha1 + (1-r)*alpha2 = 1.
    double alpha1() const { return alpha_ / r_; }
    double alpha2() const { return (1.0 - alpha_) / (1.0 - r_); }

private:
    Configuration(ConfigKind kind, double r, double alpha, double d)
        : kind_(kind), r_(r), alpha_(alpha), d_(d) {}

    static void check_r(double r) {
        // r = 0 and r = 1 are excluded: those limits are the single tank.
        if (!(r > 0.0 && r < 1.0)) {
            throw std::invalid_argument("Configuration: volume fraction r must lie strictly in (0, 1)");
        }
    }

    ConfigKind kind_;
    double r_;
    double alpha_;
    double d_;
};

/// Dimensional description of a scenario, before scaling.
struct PhysicalScenario {
    ConfigKind kind = ConfigKind::SingleTank;
    double flow = 0.0;        ///< volumetric flow Q (volume/time)
    double volume = 0.0;      ///< total volume V
    double volume1 = 0.0;     ///< first-compartment volume V1 (two-compartment only)
    double s_in = 0.0;        ///< input substrate concentration (mass/volume)
    double alpha = 0.0;       ///< inflow fraction routed to compartment 1 (parallel only)
    double d = 0.0;           ///< diffusive exchange flow (volume/time, parallel only)
};

/// Concentrations of the network, laid out as (s1, x1, s2, x2). The second
/// pair is absent for the single tank (compartments() == 1).
struct NetworkState {
    double s1 = 0.0;
    double x1 = 0.0;
    double s2 = 0.0;
    double x2 = 0.0;
    std::size_t n_compartments = 2;

    static NetworkState single(double s, double x) { return {s, x, 0.0, 0.0, 1}; }
    static NetworkState pair(double s1, double x1, double s2, double x2) {
        return {s1, x1, s2, x2, 2};
    }

    std::size_t compartments() const { return n_compartments; }
    std::size_t dimension() const { return 2 * n_compartments; }

    std::array<double, 4> to_array() const { return {s1, x1, s2, x2}; }
    static NetworkState from_array(const std::array<double, 4>& v, std::size_t compartments) {
        return {v[0], v[1], v[2], v[3], compartments};
    }

    /// Mass-balance deviation z_i = s_in - x_i - s_i of compartment i (1-based).
    double mass_deviation(double s_in, std::size_t compartment) const {
        return compartment == 1 ? s_in - x1 - s1 : s_in - x2 - s2;
    }
};

/// A dimensionless problem: configuration, scaled input concentration and the
/// scaled growth law.
struct DimensionlessScenario {
    Configuration config = Configuration::single_tank();
    double s_in = 0.0;
    GrowthLaw law = GrowthLaw::linear(1.0);
};

/**
 * @brief Scales a physical scenario to the dimensionless model.
 *
 * Concentrations are multiplied by mu'(0) * V/Q (so the scaled law has unit
 * slope at the origin), rates by V/Q, and time is rescaled so Q = V. Hence
 * r = V1/V, d = d_phys/Q, s_in = mu'(0) * (V/Q) * S_in, the linear law maps
 * to slope one, and Monod parameters map to (mu_max*V/Q, K*mu'(0)*V/Q).
 */
inline DimensionlessScenario nondimensionalize(const PhysicalScenario& phys, const GrowthLaw& law) {
    if (!(phys.flow > 0.0) || !(phys.volume > 0.0)) {
        throw std::invalid_argument("nondimensionalize: Q and V must be positive");
    }
    if (!(phys.s_in >= 0.0)) {
        throw std::invalid_argument("nondimensionalize: input concentration must be non-negative");
    }
    const double time_scale = phys.volume / phys.flow;              // V/Q
    const double conc_scale = law.derivative(0.0) * time_scale;    // mu'(0) * V/Q

    Configuration config = Configuration::single_tank();
    switch (phys.kind) {
        case ConfigKind::SingleTank:
            break;
        case ConfigKind::Serial:
        case ConfigKind::ParallelDiffusion: {
            if (!(phys.volume1 > 0.0 && phys.volume1 < phys.volume)) {
                throw std::invalid_argument("nondimensionalize: V1 must lie strictly in (0, V)");
            }
            const double r = phys.volume1 / phys.volume;
            if (phys.kind == ConfigKind::Serial) {
                config = Configuration::serial(r);
            } else {
                if (!(phys.d >= 0.0)) {
                    throw std::invalid_argument("nondimensionalize: diffusive flow must be non-negative");
                }
                config = Configuration::parallel(r, phys.alpha, phys.d / phys.flow);
            }
            break;
        }
    }

    GrowthLaw scaled = law.is_linear()
                           ? GrowthLaw::linear(1.0)
                           : GrowthLaw::monod(law.mu_max() * time_scale,
                                              law.half_saturation() * conc_scale);
    return DimensionlessScenario{config, conc_scale * phys.s_in, scaled};
}

/**
 * @brief Right-hand side of the configuration ODE at @p state.
 *
 * Single tank:
 *   s' = -mu(s) x + (s_in - s),          x' = mu(s) x - x.
 * Serial cascade (fraction r first):
 *   s1' = -mu(s1) x1 + (s_in - s1)/r,    x1' = mu(s1) x1 - x1/r,
 *   s2' = -mu(s2) x2 + (s1 - s2)/(1-r),  x2' = mu(s2) x2 + (x1 - x2)/(1-r).
 * Parallel with diffusion:
 *   s1' = -mu(s1) x1 + a1 (s_in - s1) + (d/r)(s2 - s1),
 *   x1' =  mu(s1) x1 - a1 x1 + (d/r)(x2 - x1),   and symmetrically for
 *   compartment 2 with a2 and d/(1-r), where a_i are the dilution rates.
 *
 * The unused components of the single-tank derivative are zero.
 */
inline NetworkState vector_field(const Configuration& config, const GrowthLaw& law,
                                 const NetworkState& state, double s_in) {
    if (state.compartments() != config.compartments()) {
        throw std::invalid_argument("vector_field: state and configuration dimensions differ");
    }
    const double mu1 = law.rate_unchecked(state.s1);
    switch (config.kind()) {
        case ConfigKind::SingleTank: {
            NetworkState out = NetworkState::single(0.0, 0.0);
            out.s1 = -mu1 * state.x1 + (s_in - state.s1);
            out.x1 = mu1 * state.x1 - state.x1;
            return out;
        }
        case ConfigKind::Serial: {
            const double r = config.r();
            const double mu2 = law.rate_unchecked(state.s2);
            NetworkState out;
            out.s1 = -mu1 * state.x1 + (s_in - state.s1) / r;
            out.x1 = mu1 * state.x1 - state.x1 / r;
            out.s2 = -mu2 * state.x2 + (state.s1 - state.s2) / (1.0 - r);
            out.x2 = mu2 * state.x2 + (state.x1 - state.x2) / (1.0 - r);
            return out;
        }
        case ConfigKind::ParallelDiffusion: {
            const double r = config.r();
            const double a1 = config.alpha1();
            const double a2 = config.alpha2();
            const double d1 = config.d() / r;
            const double d2 = config.d() / (1.0 - r);
            const double mu2 = law.rate_unchecked(state.s2);
            NetworkState out;
            out.s1 = -mu1 * state.x1 + a1 * (s_in - state.s1) + d1 * (state.s2 - state.s1);
            out.x1 = mu1 * state.x1 - a1 * state.x1 + d1 * (state.x2 - state.x1);
            out.s2 = -mu2 * state.x2 + a2 * (s_in - state.s2) + d2 * (state.s1 - state.s2);
            out.x2 = mu2 * state.x2 - a2 * state.x2 + d2 * (state.x1 - state.x2);
            return out;
        }
    }
    throw std::logic_error("vector_field: unreachable");
}

/// Max-norm of the vector field over the active components.
inline double field_norm(const Configuration& config, const GrowthLaw& law,
                         const NetworkState& state, double s_in) {
    const NetworkState f = vector_field(config, law, state, s_in);
    double norm = std::max(std::abs(f.s1), std::abs(f.x1));
    if (config.compartments() == 2) {
        norm = std::max(norm, std::max(std::abs(f.s2), std::abs(f.x2)));
    }
    return norm;
}

/// Steady-state output concentration associated with @p state: s for the
/// single tank, s2 for the cascade, alpha*s1 + (1-alpha)*s2 in parallel.
inline double output_concentration(const Configuration& config, const NetworkState& state) {
    switch (config.kind()) {
        case ConfigKind::SingleTank:
            return state.s1;
        case ConfigKind::Serial:
            return state.s2;
        case ConfigKind::ParallelDiffusion:
            return config.alpha() * state.s1 + (1.0 - config.alpha()) * state.s2;
    }
    throw std::logic_error("output_concentration: unreachable");
}

/**
 * @brief Analytic Jacobian of the vector field in (s1, x1, s2, x2) coordinates.
 *
 * Valid at any state and for both growth laws (mu' is known in closed form).
 * Row-major, dimension config.dimension().
 */
inline std::array<double, 16> analytic_jacobian(const Configuration& config, const GrowthLaw& law,
                                                const NetworkState& state, double /*s_in*/) {
    std::array<double, 16> j{};
    const std::size_t n = config.dimension();
    auto at = [&j, n](std::size_t row, std::size_t col) -> double& { return j[row * n + col]; };

    const double mu1 = law.rate_unchecked(state.s1);
    const double dmu1 = law.derivative(state.s1);
    switch (config.kind()) {
        case ConfigKind::SingleTank: {
            at(0, 0) = -dmu1 * state.x1 - 1.0;
            at(0, 1) = -mu1;
            at(1, 0) = dmu1 * state.x1;
            at(1, 1) = mu1 - 1.0;
            break;
        }
        case ConfigKind::Serial: {
            const double r = config.r();
            const double mu2 = law.rate_unchecked(state.s2);
            const double dmu2 = law.derivative(state.s2);
            at(0, 0) = -dmu1 * state.x1 - 1.0 / r;
            at(0, 1) = -mu1;
            at(1, 0) = dmu1 * state.x1;
            at(1, 1) = mu1 - 1.0 / r;
            at(2, 0) = 1.0 / (1.0 - r);
            at(2, 2) = -dmu2 * state.x2 - 1.0 / (1.0 - r);
            at(2, 3) = -mu2;
            at(3, 1) = 1.0 / (1.0 - r);
            at(3, 2) = dmu2 * state.x2;
            at(3, 3) = mu2 - 1.0 / (1.0 - r);
            break;
        }
        case ConfigKind::ParallelDiffusion: {
            const double r = config.r();
            const double a1 = config.alpha1();
            const double a2 = config.alpha2();
            const double d1 = config.d() / r;
            const double d2 = config.d() / (1.0 - r);
            const double mu2 = law.rate_unchecked(state.s2);
            const double dmu2 = law.derivative(state.s2);
            at(0, 0) = -dmu1 * state.x1 - a1 - d1;
            at(0, 1) = -mu1;
            at(0, 2) = d1;
            at(1, 0) = dmu1 * state.x1;
            at(1, 1) = mu1 - a1 - d1;
            at(1, 3) = d1;
            at(2, 0) = d2;
            at(2, 2) = -dmu2 * state.x2 - a2 - d2;
            at(2, 3) = -mu2;
            at(3, 1) = d2;
            at(3, 2) = dmu2 * state.x2;
            at(3, 3) = mu2 - a2 - d2;
            break;
        }
    }
    return j;
}

}  // namespace chemnet
