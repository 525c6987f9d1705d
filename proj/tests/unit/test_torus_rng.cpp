#include "chaoslab/error.hpp"
#include "chaoslab/rng.hpp"
#include "chaoslab/torus.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace chaoslab;

TEST_SUITE("torus")
{
    TEST_CASE("wrap_coordinate maps into [0, 1)")
    {
        for (double x : {-3.25, -1.0, -1e-17, 0.0, 0.5, 0.9999999999999999, 1.0, 7.75}) {
            const double w = wrap_coordinate(x);
            CHECK(w >= 0.0);
            CHECK(w < 1.0);
            CHECK(std::abs(std::remainder(w - x, 1.0)) < 1e-12);
        }
        CHECK(wrap_coordinate(-1e-17) == 0.0);
    }

    TEST_CASE("minimal_image lies in [-1/2, 1/2)")
    {
        for (double r = -2.0; r <= 2.0; r += 0.0625) {
            const double m = minimal_image(r);
            CHECK(m >= -0.5);
            CHECK(m < 0.5);
            CHECK(std::abs(std::remainder(m - r, 1.0)) < 1e-12);
        }
        CHECK(minimal_image(0.5) == -0.5);
        CHECK(minimal_image(-0.5) == -0.5);
    }

    TEST_CASE("displacement is antisymmetric up to the boundary")
    {
        const TorusPoint x{2, {0.1, 0.95}};
        const TorusPoint y{2, {0.85, 0.05}};
        const Displacement a = displacement(x, y);
        const Displacement b = displacement(y, x);
        CHECK(a[0] == doctest::Approx(0.25));
        CHECK(a[1] == doctest::Approx(-0.1));
        CHECK(b[0] == doctest::Approx(-0.25));
        CHECK(b[1] == doctest::Approx(0.1));
        CHECK(a.norm2() == doctest::Approx(0.0725));
    }

    TEST_CASE("wrap rejects bad dimensions")
    {
        std::vector<double> three{0.1, 0.2, 0.3};
        CHECK_THROWS_AS(wrap(three), InvalidArgument);
        std::vector<double> nan{std::nan("")};
        CHECK_THROWS_AS(wrap(nan), InvalidArgument);
    }
}

TEST_SUITE("rng")
{
    TEST_CASE("derive_seed separates indices")
    {
        std::set<std::uint64_t> seen;
        for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(42, i));
        CHECK(seen.size() == 10000);
        CHECK(derive_seed(1, 2) != derive_seed(2, 1));
    }

    TEST_CASE("counter draws are reproducible and independent of call order")
    {
        const CounterRng rng(7);
        const double a = rng.uniform(3, 100);
        for (int i = 0; i < 50; ++i) (void)rng.uniform(3, static_cast<std::uint64_t>(i));
        CHECK(rng.uniform(3, 100) == a);
        CHECK(rng.uniform(4, 100) != a);
    }

    TEST_CASE("uniform and normal moments")
    {
        RngStream s(CounterRng(11), 0);
        const int n = 200000;
        double su = 0.0, sz = 0.0, sz2 = 0.0, sz4 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = s.uniform();
            REQUIRE(u > 0.0);
            REQUIRE(u < 1.0);
            su += u;
            const double z = s.normal();
            sz += z;
            sz2 += z * z;
            sz4 += z * z * z * z;
        }
        CHECK(su / n == doctest::Approx(0.5).epsilon(0.005));
        CHECK(std::abs(sz / n) < 0.01);
        CHECK(sz2 / n == doctest::Approx(1.0).epsilon(0.015));
        CHECK(sz4 / n == doctest::Approx(3.0).epsilon(0.04));
    }
}
