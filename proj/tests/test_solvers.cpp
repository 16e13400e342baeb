#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "chemnet/solvers.hpp"

using namespace chemnet;
using Catch::Approx;

TEST_CASE("sign scan finds every crossing", "[solvers]") {
    // sin has zeros at multiples of pi.
    auto f = [](double x) { return std::sin(x); };
    const auto changes = scan_sign_changes(f, 0.1, 9.0, 128);
    REQUIRE(changes.size() == 2);
    CHECK(bisect(f, changes[0].lo, changes[0].hi) == Approx(M_PI).epsilon(1e-12));
    CHECK(bisect(f, changes[1].lo, changes[1].hi) == Approx(2.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("scan records a trace", "[solvers]") {
    std::vector<ScanSample> trace;
    auto f = [](double x) { return x * x + 1.0; };  // no zeros
    const auto changes = scan_sign_changes(f, -1.0, 1.0, 16, &trace);
    CHECK(changes.empty());
    CHECK(trace.size() == 17);
    CHECK(trace.front().x == -1.0);
    CHECK(trace.back().x == 1.0);
}

TEST_CASE("bisect runs to floating-point resolution", "[solvers]") {
    auto f = [](double x) { return x * x * x - 2.0; };
    const double root = bisect(f, 0.0, 4.0);
    CHECK(root == Approx(std::cbrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(bisect(f, 2.0, 3.0), std::invalid_argument);
}

TEST_CASE("golden section locates a smooth minimum", "[solvers]") {
    auto f = [](double x) { return (x - 0.7) * (x - 0.7) + 3.0; };
    const auto result = golden_section_min(f, 0.0, 2.0, 1e-10);
    CHECK(result.x == Approx(0.7).margin(1e-7));
    CHECK(result.value == Approx(3.0).margin(1e-12));
}

TEST_CASE("solve error carries its trace", "[solvers]") {
    std::vector<ScanSample> trace{{0.0, 1.0}, {1.0, 2.0}};
    const SolveError err("nothing bracketed", trace);
    CHECK(err.trace().size() == 2);
    CHECK(std::string(err.what()) == "nothing bracketed");
}
