#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "chemnet/equilibrium.hpp"
#include "chemnet/model.hpp"

using namespace chemnet;
using Catch::Approx;

namespace {

// Independent oracle for the serial second-compartment substrate with
// unit-slope linear kinetics: the smaller root of
//   s2^2 - (s_in + 1/(1-r)) s2 + 1/(r(1-r)) = 0,
// evaluated in the cancellation-stable form 2c / (b + sqrt(b^2 - 4c)).
double serial_s2_quadratic(double s_in, double r) {
    const double b = s_in + 1.0 / (1.0 - r);
    const double c = 1.0 / (r * (1.0 - r));
    return 2.0 * c / (b + std::sqrt(b * b - 4.0 * c));
}

}  // namespace

TEST_CASE("single tank equilibrium", "[equilibrium]") {
    const auto law = GrowthLaw::linear(1.0);
    {
        const auto rep = single_equilibrium(3.0, law);
        CHECK(rep.kind == EquilibriumKind::NonTrivial);
        CHECK(rep.state.s1 == Approx(1.0));
        CHECK(rep.state.x1 == Approx(2.0));
        CHECK(rep.s_out == Approx(1.0));
        CHECK(rep.residual <= 1e-9);
    }
    {
        const auto rep = single_equilibrium(0.5, law);
        CHECK(rep.kind == EquilibriumKind::Washout);
        CHECK(rep.state.s1 == 0.5);
        CHECK(rep.state.x1 == 0.0);
    }
    {
        const auto rep = single_equilibrium(3.0, GrowthLaw::monod(6.0, 5.0));
        CHECK(rep.kind == EquilibriumKind::NonTrivial);
        CHECK(rep.state.s1 == Approx(1.0).epsilon(1e-12));
    }
    // Growth never reaches the dilution rate: flagged washout.
    {
        const auto rep = single_equilibrium(3.0, GrowthLaw::monod(0.9, 1.0));
        CHECK(rep.kind == EquilibriumKind::Washout);
        CHECK(rep.flagged);
    }
    CHECK_THROWS_AS(single_equilibrium(0.0, law), std::invalid_argument);
}

TEST_CASE("serial cascade equilibrium", "[equilibrium]") {
    const auto law = GrowthLaw::linear(1.0);
    {
        const auto rep = serial_equilibrium(4.0, 0.5, law);
        CHECK(rep.kind == EquilibriumKind::NonTrivial);
        CHECK(rep.state.s1 == Approx(2.0));
        CHECK(rep.state.x1 == Approx(2.0));
        CHECK(rep.state.s2 == Approx(3.0 - std::sqrt(5.0)).epsilon(1e-12));
        CHECK(rep.state.x2 == Approx(1.0 + std::sqrt(5.0)).epsilon(1e-12));
        CHECK(rep.s_out == rep.state.s2);
        CHECK(rep.residual <= 1e-9);
    }
    // Boundary of the output-improvement equivalence: s_in = 1 + 1/r.
    {
        const auto rep = serial_equilibrium(3.0, 0.5, law);
        CHECK(std::abs(rep.state.s2 - 1.0) <= 1e-10);
    }
    // First tank washed out, second washed out too (both dilutions exceed growth).
    {
        const auto rep = serial_equilibrium(1.5, 0.5, law);
        CHECK(rep.kind == EquilibriumKind::Tank1Washout);
        CHECK(rep.flagged);
        CHECK(rep.state.s1 == 1.5);
        CHECK(rep.state.x1 == 0.0);
        CHECK(rep.s_out == Approx(1.5));
        CHECK(rep.residual <= 1e-9);
    }
    // First tank washed out, second sustains standalone at dilution 1/(1-r).
    {
        const auto rep = serial_equilibrium(3.0, 0.2, law);
        CHECK(rep.kind == EquilibriumKind::Tank1Washout);
        CHECK(rep.state.s2 == Approx(1.25));
        CHECK(rep.state.x2 == Approx(1.75));
        CHECK(rep.residual <= 1e-9);
    }
}

TEST_CASE("serial bisection agrees with the quadratic closed form", "[equilibrium][property]") {
    const auto law = GrowthLaw::linear(1.0);
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ur(0.15, 0.9);
    std::uniform_real_distribution<double> margin(0.05, 5.0);
    for (int i = 0; i < 400; ++i) {
        const double r = ur(rng);
        const double s_in = 1.0 / r + margin(rng);
        const auto rep = serial_equilibrium(s_in, r, law);
        REQUIRE(rep.kind == EquilibriumKind::NonTrivial);
        CHECK(rep.state.s2 == Approx(serial_s2_quadratic(s_in, r)).margin(1e-10));
        // Certified bound.
        CHECK(rep.state.s2 < std::min(1.0 / r, 1.0 / (1.0 - r)));
    }
}

TEST_CASE("serial output improves exactly above s_in = 1 + 1/r", "[equilibrium][property]") {
    const auto law = GrowthLaw::linear(1.0);
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> ur(0.15, 0.9);
    std::uniform_real_distribution<double> margin(0.01, 6.0);
    for (int i = 0; i < 500; ++i) {
        const double r = ur(rng);
        const double s_in = 1.0 / r + margin(rng);
        const auto rep = serial_equilibrium(s_in, r, law);
        const double lhs = rep.s_out - 1.0;
        const double rhs = s_in - (1.0 + 1.0 / r);
        if (std::abs(rhs) > 1e-9) {
            CHECK(std::signbit(lhs) == std::signbit(rhs));
        }
    }
}

TEST_CASE("serial cascade with Monod kinetics", "[equilibrium][monod]") {
    const auto law = GrowthLaw::monod(6.0, 5.0);
    const double r = 0.9;
    const double s_in = 3.0;
    const auto rep = serial_equilibrium(s_in, r, law);
    REQUIRE(rep.kind == EquilibriumKind::NonTrivial);
    // First compartment: growth balances dilution 1/r.
    CHECK(law.rate(rep.state.s1) == Approx(1.0 / r).epsilon(1e-12));
    // Second compartment root satisfies its defining balance.
    CHECK(law.rate(rep.state.s2) * (s_in - rep.state.s2) ==
          Approx((rep.state.s1 - rep.state.s2) / (1.0 - r)).margin(1e-12));
    CHECK(rep.residual <= 1e-9);
    CHECK(rep.root_count == 1);
}

TEST_CASE("parallel equilibrium reference cases", "[equilibrium]") {
    const auto law = GrowthLaw::linear(1.0);
    // Equal dilution rates (alpha = r): both compartments sit at 1.
    {
        const auto rep = parallel_equilibrium(5.0, 0.5, 0.5, 2.0, law);
        CHECK(rep.kind == EquilibriumKind::NonTrivial);
        CHECK(rep.state.s1 == Approx(1.0));
        CHECK(rep.state.s2 == Approx(1.0));
        CHECK(rep.s_out == Approx(1.0));
    }
    // Decoupled tanks at d = 0; cross-check s_out = 1 + (alpha-r)^2/(r(1-r)).
    {
        const auto rep = parallel_equilibrium(5.0, 0.9, 0.6, 0.0, law);
        CHECK(rep.kind == EquilibriumKind::NonTrivial);
        CHECK(rep.state.s1 == Approx(2.0 / 3.0));
        CHECK(rep.state.s2 == Approx(4.0));
        CHECK(rep.s_out == Approx(2.0));
        CHECK(rep.s_out == Approx(1.0 + 0.09 / (0.9 * 0.1)));
        CHECK(rep.residual <= 1e-9);
    }
    // Coupled equilibrium against a brute-force scan oracle.
    {
        const auto rep = parallel_equilibrium(1.5, 0.9, 0.6, 1.0, law);
        REQUIRE(rep.kind == EquilibriumKind::NonTrivial);
        CHECK(2.0 / 3.0 < rep.state.s1);
        CHECK(rep.state.s1 < rep.state.s2);
        CHECK(rep.state.s2 < 1.5);

        const CouplingMaps maps(1.5, 0.9, 0.6, 1.0, law);
        const auto [lo, hi] = parallel_root_bracket(1.5, 0.9, 0.6, 1.0, law);
        double root = std::numeric_limits<double>::quiet_NaN();
        const int n = 1000000;
        double prev_x = lo + 1e-12;
        double prev_g = maps.g(prev_x);
        for (int i = 1; i <= n; ++i) {
            const double x = lo + 1e-12 + (hi - 1e-12 - lo) * i / static_cast<double>(n);
            const double gx = maps.g(x);
            if (prev_g < 0.0 && gx >= 0.0) {
                root = 0.5 * (prev_x + x);
                break;
            }
            prev_x = x;
            prev_g = gx;
        }
        REQUIRE(std::isfinite(root));
        CHECK(rep.state.s1 == Approx(root).margin(1e-5));
        CHECK(rep.s_out == Approx(maps.s_in() - rep.state.x1 * 0.6 - rep.state.x2 * 0.4)
                               .margin(1e-8));
    }
    // Below the survival threshold: washout report, not an error.
    {
        const auto rep = parallel_equilibrium(0.5, 0.9, 0.6, 1.0, law);
        CHECK(rep.kind == EquilibriumKind::Washout);
        CHECK(rep.flagged);
        CHECK(rep.s_out == 0.5);
    }
}

TEST_CASE("parallel root certificates and ordering", "[equilibrium][property]") {
    const auto law = GrowthLaw::linear(1.0);
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> ur(0.15, 0.85);
    std::uniform_real_distribution<double> ua(0.02, 0.98);
    std::uniform_real_distribution<double> us(1.05, 5.0);
    std::uniform_real_distribution<double> ud(std::log(0.5), std::log(50.0));
    int tested = 0;
    while (tested < 1000) {
        const double r = ur(rng);
        const double alpha = ua(rng);
        if (std::abs(alpha - r) < 0.02) continue;
        const double s_in = us(rng);
        const double d = std::exp(ud(rng));
        ++tested;

        const auto rep = parallel_equilibrium(s_in, r, alpha, d, law);
        REQUIRE(rep.kind == EquilibriumKind::NonTrivial);
        CHECK(rep.residual <= 1e-9);
        CHECK(rep.g_residual <= 1e-12);
        CHECK(rep.g_prime > 0.0);
        CHECK(rep.root_count == 1);

        // Mass balance is exact by construction.
        CHECK(rep.state.x1 == s_in - rep.state.s1);
        CHECK(rep.state.x2 == s_in - rep.state.s2);

        // Ordering in the oriented frame a2 >= a1.
        const bool swapped = alpha > r;
        const double ro = swapped ? 1.0 - r : r;
        const double ao = swapped ? 1.0 - alpha : alpha;
        const double s1 = swapped ? rep.state.s2 : rep.state.s1;
        const double s2 = swapped ? rep.state.s1 : rep.state.s2;
        const double a1 = ao / ro;
        const double a2 = (1.0 - ao) / (1.0 - ro);
        CHECK(a1 < s1);
        CHECK(s1 < s2);
        CHECK(s2 < std::min(a2, s_in));

        // Re-evaluated root residual in extended precision.
        const CouplingMaps maps(s_in, ro, ao, d, law);
        CHECK(std::abs(static_cast<double>(maps.g(static_cast<long double>(s1)))) <= 1e-12);
    }
}

TEST_CASE("parallel root is unique on the certified bracket", "[equilibrium][property]") {
    const auto law = GrowthLaw::linear(1.0);
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> ur(0.15, 0.85);
    std::uniform_real_distribution<double> ua(0.05, 0.95);
    std::uniform_real_distribution<double> us(1.05, 4.0);
    std::uniform_real_distribution<double> ud(std::log(0.05), std::log(100.0));
    int tested = 0;
    while (tested < 50) {
        const double r = ur(rng);
        const double alpha = ua(rng);
        if (std::abs(alpha - r) < 0.03) continue;
        const double s_in = us(rng);
        const double d = std::exp(ud(rng));
        ++tested;
        const bool swapped = alpha > r;
        const double ro = swapped ? 1.0 - r : r;
        const double ao = swapped ? 1.0 - alpha : alpha;
        const CouplingMaps maps(s_in, ro, ao, d, law);
        const auto [lo, hi] = parallel_root_bracket(s_in, ro, ao, d, law);
        const double eps = 1e-10 * std::max(1.0, s_in);
        const auto crossings = scan_sign_changes(
            [&](double s) { return static_cast<double>(maps.g(static_cast<long double>(s))); },
            lo + eps, hi - eps, 100000);
        CHECK(crossings.size() == 1);
    }
}

TEST_CASE("coupling map identities", "[equilibrium]") {
    const auto law = GrowthLaw::linear(1.0);
    const double s_in = 2.5, r = 0.7, alpha = 0.3, d = 0.8;
    const CouplingMaps maps(s_in, r, alpha, d, law);
    const double a1 = alpha / r;
    const double a2 = (1.0 - alpha) / (1.0 - r);

    // Linear-law closed forms of the maps.
    for (double s : {0.1, 0.5, 1.0, 1.7, 2.2}) {
        CHECK(maps.phi2(s) == Approx(s + (r / d) * (s_in - s) * (s - a1)).margin(1e-14));
        CHECK(maps.phi1(s) == Approx(s + ((1.0 - r) / d) * (s_in - s) * (s - a2)).margin(1e-14));
        // g is the composition, not a separate formula.
        CHECK(maps.g(s) == Approx(maps.phi1(maps.phi2(s)) - s).margin(1e-14));
    }

    // The (s1 - a1) factor vanishes at a1, so phi2(a1) = a1.
    CHECK(maps.phi2(a1) == Approx(a1).margin(1e-15));
    CHECK(maps.g(a1) == Approx(maps.phi1(a1) - a1).margin(1e-14));
    // The trivial fixed point: g(s_in) = 0 exactly.
    CHECK(maps.phi2(s_in) == s_in);
    CHECK(maps.g(s_in) == 0.0);
    // Symmetric dilution rates fix the unit point.
    const CouplingMaps sym(3.0, 0.5, 0.5, 1.3, law);
    CHECK(sym.g(1.0) == Approx(0.0).margin(1e-15));

    CHECK_THROWS_AS(CouplingMaps(2.0, 0.5, 0.5, 0.0, law), std::invalid_argument);
}

TEST_CASE("washout equilibrium", "[equilibrium]") {
    {
        const auto rep = washout_equilibrium(Configuration::parallel(0.4, 0.3, 1.0), 2.0);
        CHECK(rep.state.s1 == 2.0);
        CHECK(rep.state.x1 == 0.0);
        CHECK(rep.state.s2 == 2.0);
        CHECK(rep.state.x2 == 0.0);
        CHECK(rep.s_out == 2.0);
        CHECK(rep.residual == 0.0);
    }
    {
        const auto rep = washout_equilibrium(Configuration::serial(0.4), 2.0);
        CHECK(rep.state.s1 == 2.0);
        CHECK(rep.state.s2 == 2.0);
    }
    {
        const auto rep = washout_equilibrium(Configuration::single_tank(), 0.0);
        CHECK(rep.state.s1 == 0.0);
        CHECK(rep.state.x1 == 0.0);
        CHECK(rep.s_out == 0.0);
    }
}

TEST_CASE("reported equilibria zero the vector field", "[equilibrium][property]") {
    std::mt19937_64 rng(113);
    std::uniform_real_distribution<double> ur(0.2, 0.8);
    std::uniform_real_distribution<double> ua(0.05, 0.95);
    std::uniform_real_distribution<double> us(1.1, 5.0);
    std::uniform_real_distribution<double> ud(0.0, 10.0);
    const GrowthLaw laws[] = {GrowthLaw::linear(1.0), GrowthLaw::monod(6.0, 5.0)};
    for (const auto& law : laws) {
        for (int i = 0; i < 200; ++i) {
            const double s_in = us(rng);
            const EquilibriumReport rep =
                (i % 2 == 0) ? serial_equilibrium(s_in, ur(rng), law)
                             : parallel_equilibrium(s_in, ur(rng), ua(rng), ud(rng), law);
            const Configuration config = rep.config;
            CHECK(field_norm(config, law, rep.state, s_in) <= 1e-9);
            CHECK(rep.residual <= 1e-9);
        }
    }
}

TEST_CASE("parallel equilibrium with Monod kinetics", "[equilibrium][monod]") {
    const auto law = GrowthLaw::monod(6.0, 5.0);
    // The bundled parameter sets.
    for (const auto& [r, alpha] : {std::pair{0.9, 0.6}, std::pair{0.9, 0.1}}) {
        for (double s_in : {1.2, 1.5, 2.0, 3.0}) {
            for (double d : {0.01, 0.3, 2.0, 50.0}) {
                const auto rep = parallel_equilibrium(s_in, r, alpha, d, law);
                REQUIRE(rep.kind == EquilibriumKind::NonTrivial);
                CHECK(rep.residual <= 1e-9);
                CHECK(rep.root_count == 1);
                CHECK_FALSE(rep.flagged);
            }
        }
    }
    // Saturating growth too weak for either compartment: flagged washout,
    // never a silent one.
    {
        const auto rep = parallel_equilibrium(0.5, 0.5, 0.3, 0.5, GrowthLaw::monod(1.2, 1.0));
        CHECK(rep.kind == EquilibriumKind::Washout);
        CHECK(rep.flagged);
        CHECK_FALSE(rep.note.empty());
    }
    // Symmetric Monod case: growth reaches the dilution rate far above s_in.
    {
        const auto rep = parallel_equilibrium(2.0, 0.5, 0.5, 1.0, GrowthLaw::monod(1.05, 1.0));
        CHECK(rep.kind == EquilibriumKind::Washout);
        CHECK(rep.flagged);
    }
}

TEST_CASE("partial washout of an uncoupled parallel pair", "[equilibrium]") {
    const auto law = GrowthLaw::linear(1.0);
    // alpha2 = 9 exceeds s_in: the second compartment alone washes out.
    const auto rep = parallel_equilibrium(3.0, 0.9, 0.1, 0.0, law);
    CHECK(rep.kind == EquilibriumKind::Tank1Washout);
    CHECK(rep.flagged);
    CHECK(rep.state.s1 == Approx(1.0 / 9.0));
    CHECK(rep.state.s2 == 3.0);
    CHECK(rep.state.x2 == 0.0);
    CHECK(rep.residual <= 1e-9);
}

TEST_CASE("solve_equilibrium dispatches on the configuration", "[equilibrium]") {
    const auto law = GrowthLaw::linear(1.0);
    CHECK(solve_equilibrium(Configuration::single_tank(), law, 3.0).state.compartments() == 1);
    CHECK(solve_equilibrium(Configuration::serial(0.5), law, 4.0).state.s1 == Approx(2.0));
    CHECK(solve_equilibrium(Configuration::parallel(0.5, 0.5, 1.0), law, 3.0).s_out ==
          Approx(1.0));
}
