#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "chemnet/growth.hpp"

using namespace chemnet;
using Catch::Approx;

TEST_CASE("linear growth rate", "[growth]") {
    const auto law = GrowthLaw::linear(1.0);
    CHECK(law.rate(1.0) == 1.0);
    CHECK(law.rate(0.0) == 0.0);
    CHECK(GrowthLaw::linear(2.5).rate(3.0) == Approx(7.5));
}

TEST_CASE("Monod growth rate at reference points", "[growth]") {
    const auto law = GrowthLaw::monod(6.0, 5.0);
    // Half-saturation: mu(K) = mu_max / 2.
    CHECK(law.rate(5.0) == Approx(3.0));
    // Chosen so the single-tank steady state matches the linear law.
    CHECK(law.rate(1.0) == Approx(1.0));
    CHECK(law.rate(0.0) == 0.0);
}

TEST_CASE("growth laws are strictly increasing", "[growth][property]") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> conc(0.0, 50.0);
    const GrowthLaw laws[] = {GrowthLaw::linear(0.7), GrowthLaw::monod(6.0, 5.0),
                              GrowthLaw::monod(2.0, 0.3)};
    for (const auto& law : laws) {
        for (int i = 0; i < 500; ++i) {
            double a = conc(rng);
            double b = conc(rng);
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            CHECK(law.rate(a) < law.rate(b));
        }
    }
}

TEST_CASE("growth law construction and domain checks", "[growth][errors]") {
    CHECK_THROWS_AS(GrowthLaw::linear(0.0), std::invalid_argument);
    CHECK_THROWS_AS(GrowthLaw::linear(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(GrowthLaw::monod(0.0, 5.0), std::invalid_argument);
    CHECK_THROWS_AS(GrowthLaw::monod(6.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GrowthLaw::linear(1.0).rate(-0.1), std::invalid_argument);
}

TEST_CASE("inverse matches closed forms", "[growth]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> target(0.01, 5.0);
    const auto linear = GrowthLaw::linear(1.7);
    const auto monod = GrowthLaw::monod(6.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const double t = target(rng);
        REQUIRE(linear.inverse(t));
        CHECK(*linear.inverse(t) == Approx(t / 1.7).epsilon(1e-12));
        if (t < 6.0) {
            REQUIRE(monod.inverse(t));
            // mu_max s / (K + s) = t  =>  s = t K / (mu_max - t)
            CHECK(*monod.inverse(t) == Approx(t * 5.0 / (6.0 - t)).epsilon(1e-11));
        }
    }
    CHECK(*linear.inverse(0.0) == 0.0);
    CHECK_FALSE(monod.inverse(6.0).has_value());
    CHECK_FALSE(monod.inverse(7.5).has_value());
}
