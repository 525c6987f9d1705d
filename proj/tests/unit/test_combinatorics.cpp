#include "chaoslab/combinatorics.hpp"
#include "chaoslab/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace chaoslab;

TEST_SUITE("combinatorics")
{
    TEST_CASE("factorials and binomials are exact")
    {
        CHECK(factorial(0) == 1);
        CHECK(factorial(20).str() == "2432902008176640000");
        CHECK(factorial(30).str() == "265252859812191058636308480000000");
        CHECK(binomial(64, 32).str() == "1832624140942590534");
        CHECK(binomial(5, 7) == 0);
        for (int n = 1; n < 30; ++n)
            for (int k = 1; k < n; ++k) REQUIRE(binomial(n, k) == binomial(n - 1, k - 1) + binomial(n - 1, k));
    }

    TEST_CASE("Stirling correction factor")
    {
        CHECK(stirling_factor(1) == doctest::Approx(std::numbers::e / std::sqrt(2 * std::numbers::pi)));
        CHECK(stirling_factor(1) == doctest::Approx(1.08444).epsilon(1e-5));
        CHECK(stirling_factor(10) == doctest::Approx(1.00837).epsilon(1e-5));
        double prev = 2.0;
        for (int n : {1, 2, 5, 10, 100, 1000}) {
            const double l = stirling_factor(n);
            CHECK(l < prev);
            CHECK(l == doctest::Approx(1.0 + 1.0 / (12.0 * n)).epsilon(1.0 / (n * n) + 1e-6));
            prev = l;
        }
        CHECK_THROWS_AS(stirling_factor(0), InvalidArgument);
    }

    TEST_CASE("binomial bound")
    {
        const BoundReport r = binom_bound_check(10, 3);
        CHECK(r.exact == "120");
        CHECK(r.bound == doctest::Approx(std::pow(std::numbers::e * 10.0 / 3.0, 3)));
        CHECK(r.pass);
        CHECK(to_json(r)["quantity"] == "binomial");
        CHECK_THROWS_AS(binom_bound_check(3, 4), InvalidArgument);
    }

    TEST_CASE("compositions and multiplicities")
    {
        const auto c = count_compositions(10, 4);
        CHECK(c.enumerated == 84);
        CHECK(c.equal());
        const std::vector<int> a{2, 0, 3, 1};
        CHECK(multiplicity_count(a) == 60);
        CHECK(multiplicity_count_enumerated(a) == 60);
        for (int q = 1; q <= 4; ++q)
            for (int p = 0; p <= 6; ++p) REQUIRE(multinomial_sum(q, p) == boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(p)));
    }

    TEST_CASE("effective set counts tuples without singletons")
    {
        CHECK(effective_set(2, 2).exact == 2);
        CHECK(effective_set(3, 3).exact == 3);
        CHECK(effective_set(4, 4).exact == 4 + 6 * 6);
        for (int q = 1; q <= 7; ++q)
            for (int p = 1; p <= q; ++p) {
                const auto r = effective_set(q, p);
                REQUIRE(r.exact == effective_set_by_signatures(q, p));
                REQUIRE(r.pass);
                REQUIRE(r.bounds[0] <= r.bounds[1] * (1 + 1e-12));
                REQUIRE(r.bounds[1] <= r.bounds[2] * (1 + 1e-12));
            }
        CHECK_THROWS_AS(effective_set(3, 4), InvalidArgument);
    }

    TEST_CASE("valid splits")
    {
        CHECK(valid_split(4, 2, 4, 0));
        CHECK_FALSE(valid_split(4, 2, 2, 0));
        CHECK(valid_split(4, 2, 2, 1));
        CHECK_FALSE(valid_split(4, 2, 2, 2));
        CHECK_FALSE(valid_split(3, 2, 4, 0));
        CHECK(valid_split(5, 3, 0, 3));
    }

    TEST_CASE("J-set counts agree with a membership sweep")
    {
        CHECK(j_set(2, 1, 2, 0).exact == 2);
        CHECK(j_set(2, 1, 0, 1).exact == 2);
        const auto small = j_set(3, 1, 0, 1);
        CHECK(small.exact == 3);
        CHECK(small.bound == doctest::Approx(512.0 * std::numbers::e * 3.0));
        for (int N = 1; N <= 5; ++N)
            for (int k = 1; k <= 2; ++k)
                for (int m = 0; m <= 2 * k; ++m)
                    for (int n = 0; m + n <= N; ++n) {
                        if (!valid_split(N, k, m, n)) continue;
                        std::uint64_t count = 0;
                        for_each_tuple(N, 2 * k, [&](std::span<const int> t) { count += in_j_set(t, N, m, n) ? 1 : 0; });
                        const auto r = j_set(N, k, m, n);
                        REQUIRE(r.exact == count);
                        REQUIRE(r.pass);
                    }
    }

    TEST_CASE("index helpers")
    {
        const std::vector<int> idx{1, 1, 2, 3};
        CHECK(multiplicities(idx, 3) == std::vector<int>{2, 1, 1});
        CHECK(singleton_split(idx, 3) == std::pair<int, int>{2, 1});
        CHECK_FALSE(is_reduced(idx, 3));
        const std::vector<int> red{1, 2, 2, 3, 3, 3};
        CHECK(is_reduced(red, 3));
        const std::vector<int> gap{1, 3};
        CHECK_FALSE(is_reduced(gap, 3));
        int visited = 0;
        for_each_tuple(3, 2, [&](std::span<const int>) { ++visited; });
        CHECK(visited == 9);
    }
}
