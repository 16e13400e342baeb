#pragma once

/**
 * @file stability.hpp
 * @brief Linearization objects and local exponential stability certificates.
 *
 * In (z1, z2, s1, s2) coordinates, with z_i = s_in - x_i - s_i, the Jacobian
 * of both two-compartment systems is block lower-triangular
 *
 *     [ A   0  ]
 *     [ *   J* ]
 *
 * where A is the (constant, Hurwitz) mass-balance matrix of the exactly
 * linear z-dynamics zdot = A z, and J* the substrate block at the
 * equilibrium. The spectrum is therefore the union of the two 2x2 spectra,
 * which are computed by the quadratic formula on (trace, determinant). Dense
 * 2x2/4x4 eigenproblems (finite-difference route for saturating kinetics,
 * washout classification) go through the characteristic polynomial
 * (Faddeev-LeVerrier) and a Durand-Kerner root iteration, gated on the
 * polynomial residual; no external linear-algebra dependency is needed at
 * this size.
 */

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemnet/equilibrium.hpp"
#include "chemnet/growth.hpp"
#include "chemnet/model.hpp"

namespace chemnet {

/// Dense 2x2 matrix (row major).
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }

    /// Eigenvalues by the quadratic formula on (trace, det).
    std::array<std::complex<double>, 2> eigenvalues() const {
        const double tr = trace();
        const double disc = tr * tr - 4.0 * det();
        if (disc >= 0.0) {
            const double root = std::sqrt(disc);
            return {std::complex<double>(0.5 * (tr - root), 0.0),
                    std::complex<double>(0.5 * (tr + root), 0.0)};
        }
        const double imag = 0.5 * std::sqrt(-disc);
        return {std::complex<double>(0.5 * tr, -imag), std::complex<double>(0.5 * tr, imag)};
    }
};

/// Mass-balance matrix together with its dimension (1 for the single tank).
struct MassMatrix {
    std::size_t dim = 2;
    Mat2 m;
};

/**
 * @brief Coefficient matrix of the mass-balance deviation dynamics zdot = A z.
 *
 * Serial:   A = [[-1/r, 0], [1/(1-r), -1/(1-r)]].
 * Parallel: A = [[-a1 - d/r, d/r], [d/(1-r), -a2 - d/(1-r)]].
 * Single tank: the scalar -1 (returned as a 1x1 matrix).
 *
 * Growth terms cancel in s + x, so A is independent of the growth law.
 */
inline MassMatrix mass_balance_matrix(const Configuration& config) {
    MassMatrix out;
    switch (config.kind()) {
        case ConfigKind::SingleTank:
            out.dim = 1;
            out.m.a11 = -1.0;
            return out;
        case ConfigKind::Serial: {
            const double r = config.r();
            out.m = {-1.0 / r, 0.0, 1.0 / (1.0 - r), -1.0 / (1.0 - r)};
            return out;
        }
        case ConfigKind::ParallelDiffusion: {
            const double r = config.r();
            const double d = config.d();
            out.m = {-config.alpha1() - d / r, d / r, d / (1.0 - r),
                     -config.alpha2() - d / (1.0 - r)};
            return out;
        }
    }
    throw std::logic_error("mass_balance_matrix: unreachable");
}

/**
 * @brief Substrate block J* of the (z, s)-coordinate Jacobian at @p state.
 *
 * Valid at any state (including washout) and for both growth laws:
 * the diagonal entries are mu(s_i) - mu'(s_i) x_i - (dilution + exchange),
 * the off-diagonals the exchange rates. At a non-trivial parallel
 * equilibrium this reduces to
 *
 *   [ -(d/r) phi2'(s1*)      d/r               ]
 *   [  d/(1-r)              -(d/(1-r)) phi1'(s2*) ].
 */
inline MassMatrix substrate_block(const Configuration& config, const GrowthLaw& law,
                                  const NetworkState& state) {
    MassMatrix out;
    const double mu1 = law.rate_unchecked(state.s1);
    const double dmu1 = law.derivative(state.s1);
    switch (config.kind()) {
        case ConfigKind::SingleTank:
            out.dim = 1;
            out.m.a11 = mu1 - dmu1 * state.x1 - 1.0;
            return out;
        case ConfigKind::Serial: {
            const double r = config.r();
            const double mu2 = law.rate_unchecked(state.s2);
            const double dmu2 = law.derivative(state.s2);
            out.m = {mu1 - dmu1 * state.x1 - 1.0 / r, 0.0, 1.0 / (1.0 - r),
                     mu2 - dmu2 * state.x2 - 1.0 / (1.0 - r)};
            return out;
        }
        case ConfigKind::ParallelDiffusion: {
            const double r = config.r();
            const double d = config.d();
            const double mu2 = law.rate_unchecked(state.s2);
            const double dmu2 = law.derivative(state.s2);
            out.m = {mu1 - dmu1 * state.x1 - config.alpha1() - d / r, d / r, d / (1.0 - r),
                     mu2 - dmu2 * state.x2 - config.alpha2() - d / (1.0 - r)};
            return out;
        }
    }
    throw std::logic_error("substrate_block: unreachable");
}

namespace eigen_detail {

/// Characteristic polynomial coefficients of an n x n matrix (n <= 4) by the
/// Faddeev-LeVerrier recursion: p(x) = x^n + c[1] x^{n-1} + ... + c[n].
inline std::vector<double> characteristic_polynomial(const std::array<double, 16>& a,
                                                     std::size_t n) {
    std::array<double, 16> m{};   // M_k
    std::array<double, 16> tmp{};
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    // M_1 = A
    for (std::size_t i = 0; i < n * n; ++i) m[i] = a[i];
    for (std::size_t k = 1; k <= n; ++k) {
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += m[i * n + i];
        c[k] = -tr / static_cast<double>(k);
        if (k == n) break;
        // M_{k+1} = A (M_k + c_k I)
        for (std::size_t i = 0; i < n * n; ++i) tmp[i] = m[i];
        for (std::size_t i = 0; i < n; ++i) tmp[i * n + i] += c[k];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double sum = 0.0;
                for (std::size_t l = 0; l < n; ++l) sum += a[i * n + l] * tmp[l * n + j];
                m[i * n + j] = sum;
            }
        }
    }
    return c;
}

/// All roots of a monic polynomial with real coefficients by the
/// Durand-Kerner simultaneous iteration.
inline std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& c) {
    const std::size_t n = c.size() - 1;
    auto eval = [&](std::complex<double> x) {
        std::complex<double> p(1.0, 0.0);
        for (std::size_t k = 1; k <= n; ++k) p = p * x + c[k];
        return p;
    };
    double radius = 0.0;
    for (std::size_t k = 1; k <= n; ++k) radius = std::max(radius, std::pow(std::abs(c[k]), 1.0 / k));
    radius = 1.0 + 2.0 * radius;

    std::vector<std::complex<double>> w(n);
    const std::complex<double> seed(0.4, 0.9);
    std::complex<double> p(1.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        p *= seed;
        w[i] = radius * p / std::abs(p);
    }
    for (int it = 0; it < 500; ++it) {
        double shift = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> denom(1.0, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) denom *= (w[i] - w[j]);
            }
            if (std::abs(denom) == 0.0) {
                w[i] += std::complex<double>(1e-8, 1e-8);
                continue;
            }
            const std::complex<double> delta = eval(w[i]) / denom;
            w[i] -= delta;
            shift = std::max(shift, std::abs(delta));
        }
        if (shift < 1e-15 * radius) break;
    }
    // Snap conjugate-pair artifacts with negligible imaginary parts.
    for (auto& root : w) {
        if (std::abs(root.imag()) < 1e-12 * std::max(1.0, std::abs(root.real()))) {
            root = std::complex<double>(root.real(), 0.0);
        }
    }
    return w;
}

/// Worst |p(lambda)| over the roots, scaled for the verification gate.
inline double roots_residual(const std::vector<double>& c,
                             const std::vector<std::complex<double>>& roots) {
    const std::size_t n = c.size() - 1;
    double worst = 0.0;
    for (const auto& root : roots) {
        std::complex<double> p(1.0, 0.0);
        for (std::size_t k = 1; k <= n; ++k) p = p * root + c[k];
        double scale = 1.0;
        for (std::size_t k = 0; k < n; ++k) scale *= std::max(1.0, std::abs(root));
        worst = std::max(worst, std::abs(p) / scale);
    }
    return worst;
}

}  // namespace eigen_detail

/// Eigenvalues of a dense n x n matrix (n <= 4) with a residual gate on the
/// characteristic polynomial.
inline std::vector<std::complex<double>> dense_eigenvalues(const std::array<double, 16>& a,
                                                           std::size_t n,
                                                           double residual_gate = 1e-9) {
    const auto poly = eigen_detail::characteristic_polynomial(a, n);
    auto roots = eigen_detail::polynomial_roots(poly);
    const double res = eigen_detail::roots_residual(poly, roots);
    if (res > residual_gate) {
        throw std::runtime_error("dense_eigenvalues: eigenvalue residual gate exceeded");
    }
    return roots;
}

/**
 * @brief Central-difference Jacobian of the vector field in original
 * (s1, x1, s2, x2) coordinates, step h = 1e-7 * max(1, |state|).
 */
inline std::array<double, 16> fd_jacobian(const Configuration& config, const GrowthLaw& law,
                                          const NetworkState& state, double s_in,
                                          double h_scale = 1e-7) {
    const std::size_t n = config.dimension();
    double norm = 0.0;
    for (double v : state.to_array()) norm = std::max(norm, std::abs(v));
    const double h = h_scale * std::max(1.0, norm);

    std::array<double, 16> j{};
    for (std::size_t col = 0; col < n; ++col) {
        auto plus = state.to_array();
        auto minus = state.to_array();
        plus[col] += h;
        minus[col] -= h;
        const NetworkState fp = vector_field(config, law,
                                             NetworkState::from_array(plus, state.compartments()), s_in);
        const NetworkState fm = vector_field(config, law,
                                             NetworkState::from_array(minus, state.compartments()), s_in);
        const auto ap = fp.to_array();
        const auto am = fm.to_array();
        for (std::size_t row = 0; row < n; ++row) {
            j[row * n + col] = (ap[row] - am[row]) / (2.0 * h);
        }
    }
    return j;
}

/// Full linearization at an equilibrium: the dense Jacobian plus, when the
/// block route applies, the mass-balance and substrate 2x2 blocks.
struct Linearization {
    std::size_t dim = 2;
    std::array<double, 16> full{};      ///< original-coordinate Jacobian, row major
    MassMatrix mass;                    ///< A block of the (z, s) form
    MassMatrix jstar;                   ///< J* block of the (z, s) form
    bool finite_difference = false;     ///< full was obtained by central differences
    bool fd_flagged = false;            ///< Richardson step-halving check failed
    double fd_richardson = 0.0;         ///< worst relative deviation of the check
};

/**
 * @brief Linearization at a reported equilibrium.
 *
 * Linear kinetics use the closed-form blocks ((z, s) coordinates) and the
 * analytic original-coordinate Jacobian. Saturating kinetics use central
 * finite differences on the vector field, cross-checked against a halved
 * step (flagged when the two disagree by more than 1e-4 relative).
 */
inline Linearization jacobian_nontrivial(const EquilibriumReport& eq, const GrowthLaw& law) {
    Linearization lin;
    lin.dim = eq.config.dimension();
    lin.mass = mass_balance_matrix(eq.config);
    lin.jstar = substrate_block(eq.config, law, eq.state);
    if (law.is_linear()) {
        lin.full = analytic_jacobian(eq.config, law, eq.state, eq.s_in);
        return lin;
    }
    lin.finite_difference = true;
    lin.full = fd_jacobian(eq.config, law, eq.state, eq.s_in, 1e-7);
    const auto halved = fd_jacobian(eq.config, law, eq.state, eq.s_in, 0.5e-7);
    const std::size_t n = lin.dim;
    double scale = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(lin.full[i]));
    for (std::size_t i = 0; i < n * n; ++i) {
        lin.fd_richardson =
            std::max(lin.fd_richardson, std::abs(lin.full[i] - halved[i]) / std::max(1.0, scale));
    }
    lin.fd_flagged = lin.fd_richardson > 1e-4;
    return lin;
}

enum class StabilityVerdict { ExponentiallyStable, Unstable, Marginal };

inline const char* to_string(StabilityVerdict verdict) {
    switch (verdict) {
        case StabilityVerdict::ExponentiallyStable: return "exponentially-stable";
        case StabilityVerdict::Unstable: return "unstable";
        case StabilityVerdict::Marginal: return "marginal";
    }
    return "?";
}

struct StabilityCertificate {
    double mass_matrix_trace = 0.0;
    double mass_matrix_det = 0.0;
    double jac_trace = 0.0;             ///< trace of the J* block
    double jac_det = 0.0;               ///< determinant of the J* block
    std::vector<std::complex<double>> eigenvalues;
    StabilityVerdict verdict = StabilityVerdict::Marginal;
    bool fd_flagged = false;
    double max_real_part = 0.0;
};

/**
 * @brief Local stability certificate for a reported equilibrium.
 *
 * The verdict follows the eigenvalue real parts with a +-1e-12 marginality
 * band around zero (washout equilibria may legitimately be non-hyperbolic
 * and must classify as Marginal rather than fail).
 */
inline StabilityCertificate certify(const EquilibriumReport& eq, const GrowthLaw& law,
                                    const Configuration& config) {
    StabilityCertificate cert;
    const MassMatrix mass = mass_balance_matrix(config);
    const MassMatrix jstar = substrate_block(config, law, eq.state);
    if (mass.dim == 1) {
        cert.mass_matrix_trace = cert.mass_matrix_det = mass.m.a11;
        cert.jac_trace = cert.jac_det = jstar.m.a11;
    } else {
        cert.mass_matrix_trace = mass.m.trace();
        cert.mass_matrix_det = mass.m.det();
        cert.jac_trace = jstar.m.trace();
        cert.jac_det = jstar.m.det();
    }

    const bool block_route = law.is_linear() || eq.kind != EquilibriumKind::NonTrivial;
    if (eq.kind == EquilibriumKind::NonTrivial && !law.is_linear()) {
        const Linearization lin = jacobian_nontrivial(eq, law);
        cert.fd_flagged = lin.fd_flagged;
        cert.eigenvalues = dense_eigenvalues(lin.full, lin.dim);
    } else if (block_route && mass.dim == 2) {
        for (const auto& ev : mass.m.eigenvalues()) cert.eigenvalues.push_back(ev);
        for (const auto& ev : jstar.m.eigenvalues()) cert.eigenvalues.push_back(ev);
    } else {
        cert.eigenvalues.push_back(mass.m.a11);
        cert.eigenvalues.push_back(jstar.m.a11);
    }

    double max_real = -std::numeric_limits<double>::infinity();
    for (const auto& ev : cert.eigenvalues) max_real = std::max(max_real, ev.real());
    cert.max_real_part = max_real;
    if (max_real < -1e-12) {
        cert.verdict = StabilityVerdict::ExponentiallyStable;
    } else if (max_real > 1e-12) {
        cert.verdict = StabilityVerdict::Unstable;
    } else {
        cert.verdict = StabilityVerdict::Marginal;
    }
    return cert;
}

}  // namespace chemnet
