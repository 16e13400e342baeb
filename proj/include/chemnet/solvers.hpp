#pragma once

/**
 * @file solvers.hpp
 * @brief Scalar bracketing, bisection and golden-section search.
 *
 * The steady-state problems solved in this library are smooth scalar
 * equations with certified sign structure, so robustness is preferred over
 * iteration count: roots are located by a uniform sign scan followed by
 * bisection (optionally polished by Newton elsewhere), minima by
 * golden-section reduction of a bracket.
 */

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chemnet {

/// One sampled point of a failed bracketing scan, kept for diagnostics.
struct ScanSample {
    double x = 0.0;
    double value = 0.0;
};

/// Thrown when a bracketing scan finds no sign change where one is expected.
/// Carries the scan trace so the failure is reproducible.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& message, std::vector<ScanSample> trace)
        : std::runtime_error(message), trace_(std::move(trace)) {}

    const std::vector<ScanSample>& trace() const { return trace_; }

private:
    std::vector<ScanSample> trace_;
};

/// A bracket [lo, hi] with f(lo) and f(hi) of opposite sign (or containing an
/// exact zero at lo).
struct SignChange {
    double lo = 0.0;
    double hi = 0.0;
};

/**
 * @brief Scans [lo, hi] at n uniform subintervals and returns every bracket
 * over which f changes sign. Exact zeros at sample points are returned as
 * degenerate brackets.
 */
template <class F>
std::vector<SignChange> scan_sign_changes(F&& f, double lo, double hi, int n,
                                          std::vector<ScanSample>* trace = nullptr) {
    if (!(hi > lo) || n < 1) {
        throw std::invalid_argument("scan_sign_changes: requires hi > lo and n >= 1");
    }
    std::vector<SignChange> changes;
    double x_prev = lo;
    double f_prev = f(lo);
    if (trace) trace->push_back({x_prev, f_prev});
    for (int i = 1; i <= n; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        const double fx = f(x);
        if (trace) trace->push_back({x, fx});
        if (f_prev == 0.0) {
            changes.push_back({x_prev, x_prev});
        } else if (fx != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
            changes.push_back({x_prev, x});
        }
        x_prev = x;
        f_prev = fx;
    }
    if (f_prev == 0.0) {
        changes.push_back({x_prev, x_prev});
    }
    return changes;
}

/**
 * @brief Bisection on a sign-change bracket, run to floating-point resolution.
 *
 * Requires f(lo) and f(hi) of opposite sign (zero endpoints are returned
 * directly). The returned abscissa is within one representable step of the
 * root crossing.
 */
template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if (std::signbit(flo) == std::signbit(fhi)) {
        throw std::invalid_argument("bisect: endpoints do not bracket a sign change");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct GoldenResult {
    double x = 0.0;
    double value = 0.0;
};

/**
 * @brief Golden-section minimization of a unimodal function on [lo, hi].
 *
 * Shrinks the bracket until its width drops below
 * rel_tol * max(1, |x|) and returns the best interior sample.
 */
template <class F>
GoldenResult golden_section_min(F&& f, double lo, double hi, double rel_tol = 1e-8) {
    if (!(hi > lo)) {
        throw std::invalid_argument("golden_section_min: requires hi > lo");
    }
    constexpr double inv_phi = 0.6180339887498949;  // 1/phi
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 400; ++it) {
        if ((b - a) <= rel_tol * std::max(1.0, std::abs(x1)) || x1 >= x2) break;
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? GoldenResult{x1, f1} : GoldenResult{x2, f2};
}

}  // namespace chemnet
