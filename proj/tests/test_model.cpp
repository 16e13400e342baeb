#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "chemnet/model.hpp"
#include "chemnet/stability.hpp"

using namespace chemnet;
using Catch::Approx;

namespace {

NetworkState random_state(std::mt19937_64& rng, double hi, std::size_t compartments) {
    std::uniform_real_distribution<double> u(0.0, hi);
    if (compartments == 1) return NetworkState::single(u(rng), u(rng));
    return NetworkState::pair(u(rng), u(rng), u(rng), u(rng));
}

}  // namespace

TEST_CASE("configuration invariants", "[model]") {
    CHECK_THROWS_AS(Configuration::serial(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Configuration::serial(1.0), std::invalid_argument);
    CHECK_THROWS_AS(Configuration::parallel(0.5, -0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Configuration::parallel(0.5, 1.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Configuration::parallel(0.5, 0.5, -1.0), std::invalid_argument);

    // r*a1 + (1-r)*a2 = 1 up to a few ulp, across random parameters.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 1000; ++i) {
        const double r = u(rng);
        const double alpha = u(rng);
        const auto config = Configuration::parallel(r, alpha, 0.3);
        const double sum = r * config.alpha1() + (1.0 - r) * config.alpha2();
        CHECK(std::abs(sum - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon());
    }
}

TEST_CASE("nondimensionalize identity and rescaling", "[model]") {
    // All scale factors equal one.
    {
        PhysicalScenario phys;
        phys.kind = ConfigKind::Serial;
        phys.flow = 3.0;
        phys.volume = 3.0;
        phys.volume1 = 1.5;
        phys.s_in = 2.0;
        const auto dimless = nondimensionalize(phys, GrowthLaw::linear(1.0));
        CHECK(dimless.config.r() == Approx(0.5));
        CHECK(dimless.s_in == Approx(2.0));
        CHECK(dimless.law.slope_coefficient() == 1.0);
    }
    // Concentration scale m V/Q = 2, time scale V/Q = 2, d = d_phys / Q.
    {
        PhysicalScenario phys;
        phys.kind = ConfigKind::ParallelDiffusion;
        phys.flow = 2.0;
        phys.volume = 4.0;
        phys.volume1 = 1.0;
        phys.s_in = 1.0;
        phys.alpha = 0.3;
        phys.d = 0.5;
        const auto dimless = nondimensionalize(phys, GrowthLaw::linear(1.0));
        CHECK(dimless.config.r() == Approx(0.25));
        CHECK(dimless.s_in == Approx(2.0));
        CHECK(dimless.config.d() == Approx(0.25));
        CHECK(dimless.config.alpha() == Approx(0.3));
    }
    // alpha = 0 is the dead-zone model.
    {
        PhysicalScenario phys;
        phys.kind = ConfigKind::ParallelDiffusion;
        phys.flow = 1.0;
        phys.volume = 1.0;
        phys.volume1 = 0.4;
        phys.s_in = 2.0;
        phys.alpha = 0.0;
        phys.d = 0.1;
        const auto dimless = nondimensionalize(phys, GrowthLaw::linear(1.0));
        CHECK(dimless.config.kind() == ConfigKind::ParallelDiffusion);
        CHECK(dimless.config.alpha() == 0.0);
    }
    // Monod parameters rescale with the same concentration and rate scales,
    // and the scaled law keeps unit slope at the origin.
    {
        PhysicalScenario phys;
        phys.kind = ConfigKind::SingleTank;
        phys.flow = 2.0;
        phys.volume = 4.0;
        phys.s_in = 1.0;
        const auto law = GrowthLaw::monod(3.0, 1.5);
        const auto dimless = nondimensionalize(phys, law);
        CHECK(dimless.law.mu_max() == Approx(3.0 * 2.0));
        CHECK(dimless.law.half_saturation() == Approx(1.5 * 2.0 * 2.0));
        CHECK(dimless.law.derivative(0.0) == Approx(1.0));
    }
}

TEST_CASE("nondimensionalize rejects bad volumes and flows", "[model][errors]") {
    PhysicalScenario phys;
    phys.kind = ConfigKind::Serial;
    phys.flow = 1.0;
    phys.volume = 2.0;
    phys.volume1 = 2.0;  // V1 must be strictly inside (0, V)
    phys.s_in = 1.0;
    const auto law = GrowthLaw::linear(1.0);
    CHECK_THROWS_AS(nondimensionalize(phys, law), std::invalid_argument);
    phys.volume1 = 0.0;
    CHECK_THROWS_AS(nondimensionalize(phys, law), std::invalid_argument);
    phys.volume1 = 1.0;
    phys.flow = 0.0;
    CHECK_THROWS_AS(nondimensionalize(phys, law), std::invalid_argument);
    phys.flow = 1.0;
    phys.volume = -2.0;
    CHECK_THROWS_AS(nondimensionalize(phys, law), std::invalid_argument);
}

TEST_CASE("vector field reference values", "[model]") {
    const auto law = GrowthLaw::linear(1.0);

    // Single tank at its non-trivial equilibrium.
    {
        const auto config = Configuration::single_tank();
        const auto f = vector_field(config, law, NetworkState::single(1.0, 2.0), 3.0);
        CHECK(f.s1 == Approx(0.0).margin(1e-15));
        CHECK(f.x1 == Approx(0.0).margin(1e-15));
    }
    // Serial cascade, hand-substituted values.
    {
        const auto config = Configuration::serial(0.5);
        const auto f = vector_field(config, law, NetworkState::pair(2.0, 2.0, 1.0, 3.0), 4.0);
        CHECK(f.s1 == Approx(0.0).margin(1e-15));
        CHECK(f.x1 == Approx(0.0).margin(1e-15));
        CHECK(f.s2 == Approx(-1.0));
        CHECK(f.x2 == Approx(1.0));
    }
    // Washout is a fixed point of the parallel field.
    {
        const auto config = Configuration::parallel(0.3, 0.7, 2.0);
        const double s_in = 2.5;
        const auto f = vector_field(config, law, NetworkState::pair(s_in, 0.0, s_in, 0.0), s_in);
        CHECK(f.s1 == 0.0);
        CHECK(f.x1 == 0.0);
        CHECK(f.s2 == 0.0);
        CHECK(f.x2 == 0.0);
    }
}

TEST_CASE("vector field rejects dimension mismatch", "[model][errors]") {
    const auto law = GrowthLaw::linear(1.0);
    CHECK_THROWS_AS(vector_field(Configuration::serial(0.5), law,
                                 NetworkState::single(1.0, 1.0), 2.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(vector_field(Configuration::single_tank(), law,
                                 NetworkState::pair(1.0, 1.0, 1.0, 1.0), 2.0),
                    std::invalid_argument);
}

TEST_CASE("orthant invariance on boundary states", "[model][property]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    const GrowthLaw laws[] = {GrowthLaw::linear(1.0), GrowthLaw::monod(6.0, 5.0)};
    const Configuration configs[] = {Configuration::serial(0.35),
                                     Configuration::parallel(0.6, 0.25, 0.8)};
    for (const auto& law : laws) {
        for (const auto& config : configs) {
            for (int i = 0; i < 400; ++i) {
                NetworkState state = random_state(rng, 4.0, 2);
                const int component = static_cast<int>(rng() % 4);
                auto a = state.to_array();
                a[component] = 0.0;
                state = NetworkState::from_array(a, 2);
                const auto f = vector_field(config, law, state, 3.0);
                CHECK(f.to_array()[component] >= 0.0);
            }
        }
    }
}

TEST_CASE("mass-balance deviations follow the linear dynamics", "[model][property]") {
    // The z-dynamics assembled from the vector field must equal A z exactly
    // (growth terms cancel in the s + x sums), for both growth laws.
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const GrowthLaw laws[] = {GrowthLaw::linear(1.0), GrowthLaw::monod(6.0, 5.0)};
    for (const auto& law : laws) {
        for (int i = 0; i < 300; ++i) {
            const double r = u(rng);
            const Configuration config =
                (i % 2 == 0) ? Configuration::serial(r)
                             : Configuration::parallel(r, u(rng), 3.0 * u(rng));
            const double s_in = 1.0 + 3.0 * u(rng);
            const NetworkState state = random_state(rng, 2.0 * s_in, 2);
            const auto f = vector_field(config, law, state, s_in);
            const double z1 = state.mass_deviation(s_in, 1);
            const double z2 = state.mass_deviation(s_in, 2);
            const double z1_dot = -f.s1 - f.x1;
            const double z2_dot = -f.s2 - f.x2;
            const auto mass = mass_balance_matrix(config);
            CHECK(z1_dot == Approx(mass.m.a11 * z1 + mass.m.a12 * z2).margin(1e-12));
            CHECK(z2_dot == Approx(mass.m.a21 * z1 + mass.m.a22 * z2).margin(1e-12));
        }
    }
}

TEST_CASE("output concentration per configuration", "[model]") {
    CHECK(output_concentration(Configuration::single_tank(), NetworkState::single(1.5, 1.0)) ==
          1.5);
    CHECK(output_concentration(Configuration::serial(0.3),
                               NetworkState::pair(2.0, 1.0, 0.7, 1.0)) == 0.7);
    CHECK(output_concentration(Configuration::parallel(0.5, 0.25, 1.0),
                               NetworkState::pair(2.0, 1.0, 4.0, 1.0)) ==
          Approx(0.25 * 2.0 + 0.75 * 4.0));
}
