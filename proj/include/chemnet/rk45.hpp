#pragma once

/**
 * @file rk45.hpp
 * @brief Adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4)).
 *
 * Step size is controlled on the error-per-unit-step, which makes the global
 * error scale linearly with the requested tolerance. An optional
 * non-negativity guard rejects (and halves) steps that would leave the
 * non-negative orthant, instead of clamping, so conserved diagnostics are not
 * corrupted.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemnet {

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_step = 0.0;   ///< 0 picks a heuristic first step
    double max_step = 0.0;       ///< 0 means unbounded
    bool enforce_nonnegative = false;
    double min_step = 1e-14;     ///< below this the integration aborts
};

/// Thrown on step-size underflow; carries the last accepted time and state.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& message, double time, std::vector<double> state)
        : std::runtime_error(message), time_(time), state_(std::move(state)) {}

    double time() const { return time_; }
    const std::vector<double>& state() const { return state_; }

private:
    double time_;
    std::vector<double> state_;
};

namespace rk45_detail {

// Dormand-Prince coefficients; the fifth-order row is FSAL.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

}  // namespace rk45_detail

/**
 * @brief Integrates y' = f(t, y) from t0 to t_end.
 *
 * @tparam N    state dimension
 * @tparam Rhs  callable (double t, const std::array<double,N>& y,
 *              std::array<double,N>& dydt)
 * @param observer  called after every accepted step with
 *                  (t, y, dydt_at_y); return false to stop early.
 * @param sample_times  strictly increasing times the solver must land on
 *                      exactly (the observer sees them as regular steps).
 */
template <std::size_t N, class Rhs, class Observer>
void integrate_adaptive(Rhs&& f, double t0, double t_end, std::array<double, N> y,
                        const IntegratorOptions& opts, Observer&& observer,
                        const std::vector<double>& sample_times = {}) {
    using namespace rk45_detail;
    using Vec = std::array<double, N>;

    if (!(t_end > t0)) {
        throw std::invalid_argument("integrate_adaptive: t_end must exceed t0");
    }
    if (!(opts.rel_tol > 0.0) || !(opts.abs_tol > 0.0)) {
        throw std::invalid_argument("integrate_adaptive: tolerances must be positive");
    }

    Vec k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    double t = t0;
    f(t, y, k1);

    auto err_norm_per_unit_step = [&](const Vec& ycur, const Vec& ynext, double h) {
        double norm = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            const double scale =
                opts.abs_tol + opts.rel_tol * std::max(std::abs(ycur[i]), std::abs(ynext[i]));
            norm = std::max(norm, std::abs(err) / scale);
        }
        return norm / h;
    };

    double h = opts.initial_step;
    if (h <= 0.0) {
        double fn = 0.0;
        for (std::size_t i = 0; i < N; ++i) fn = std::max(fn, std::abs(k1[i]));
        h = std::min((t_end - t0) / 100.0, 0.1 / (fn + 1.0));
    }
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);

    std::size_t next_sample = 0;
    while (next_sample < sample_times.size() && sample_times[next_sample] <= t0) ++next_sample;

    auto fail = [&](const char* what) {
        throw IntegrationError(what, t, std::vector<double>(y.begin(), y.end()));
    };

    while (t < t_end) {
        double h_try = h;
        double limit = t_end;
        if (next_sample < sample_times.size()) limit = std::min(limit, sample_times[next_sample]);
        const bool clipped = t + h_try >= limit;
        if (clipped) h_try = limit - t;
        if (h_try < opts.min_step) fail("integrate_adaptive: step size underflow");

        // One Dormand-Prince stage sweep.
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h_try * a21 * k1[i];
        f(t + c2 * h_try, ytmp, k2);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h_try * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h_try, ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h_try * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h_try, ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h_try * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h_try, ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] +
                      h_try * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + h_try, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h_try * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + h_try, ynew, k7);

        if (opts.enforce_nonnegative) {
            bool negative = false;
            for (std::size_t i = 0; i < N; ++i) negative = negative || ynew[i] < 0.0;
            if (negative) {
                h = 0.5 * h_try;
                if (h < opts.min_step) fail("integrate_adaptive: step size underflow at orthant boundary");
                continue;
            }
        }

        const double err = err_norm_per_unit_step(y, ynew, h_try);
        if (err <= 1.0) {
            t = clipped ? limit : t + h_try;
            y = ynew;
            k1 = k7;  // FSAL
            if (next_sample < sample_times.size() && t >= sample_times[next_sample]) ++next_sample;
            if (!observer(t, y, k1)) return;
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.25) : 5.0;
            h = h_try * std::clamp(grow, 0.2, 5.0);
        } else {
            h = h_try * std::clamp(0.9 * std::pow(err, -0.25), 0.2, 0.9);
            if (h < opts.min_step) fail("integrate_adaptive: step size underflow");
        }
        if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
    }
}

}  // namespace chemnet
