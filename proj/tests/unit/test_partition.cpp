#include "chaoslab/combinatorics.hpp"
#include "chaoslab/error.hpp"
#include "chaoslab/partition.hpp"
#include "chaoslab/test_functions.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <doctest.h>

#include <cmath>
#include <functional>

using namespace chaoslab;

namespace {

/// plain tensor-product rule over all N coordinates
double brute_force(const TestFunctionPair& tf, int N, int nodes, const std::function<double(const std::vector<double>&)>& f)
{
    std::vector<double> x(static_cast<std::size_t>(N)), w(static_cast<std::size_t>(nodes)), grid(w.size());
    for (int i = 0; i < nodes; ++i) {
        grid[i] = double(i) / nodes;
        w[i] = tf.rho_bar.eval(&grid[i]) / nodes;
    }
    double total = 0.0;
    for_each_tuple(nodes, N, [&](std::span<const int> t) {
        double weight = 1.0;
        for (int a = 0; a < N; ++a) {
            x[a] = grid[t[a] - 1];
            weight *= w[t[a] - 1];
        }
        total += weight * f(x);
    });
    return total;
}

double double_sum(const TestFunctionPair& tf, const std::vector<double>& x)
{
    double s = 0.0;
    for (double a : x)
        for (double b : x) s += tf.eval(a, b);
    return std::exp(s / double(x.size()));
}

double squared_sum(const TestFunctionPair& tf, const std::vector<double>& x)
{
    double s = 0.0;
    for (double b : x) s += tf.eval(x[0], b);
    return std::exp(s * s / double(x.size()));
}

} // namespace

TEST_SUITE("partition")
{
    TEST_CASE("closed-form constants")
    {
        CHECK(squared_sum_bound(0.0) == doctest::Approx(2.0));
        CHECK(squared_sum_bound(0.1) == doctest::Approx(2.1169).epsilon(1e-4));
        CHECK_THROWS_AS(squared_sum_bound(0.2), OutOfHypothesis);
        CHECK(double_sum_bound(0.5) == doctest::Approx(4.0));
        CHECK_THROWS_AS(double_sum_bound(1.0), OutOfHypothesis);
        CHECK(double_sum_gamma(1e-3) == doctest::Approx(kDoubleSumConstant * 1e-6));
    }

    TEST_CASE("test functions carry correct cancellation flags")
    {
        for (const auto& tf : {TestFunctionPair::cos_cos(1.0), TestFunctionPair::mixed(1.0), TestFunctionPair::shifted_cos(1.0),
                               TestFunctionPair::centered_nonuniform(1.0)}) {
            CHECK(tf.x_cancellation_residual() < 1e-12);
            CHECK(tf.z_cancellation_residual() < 1e-12);
            CHECK_NOTHROW(tf.check_flags());
        }
        TestFunctionPair bad;
        bad.name = "not-centered";
        bad.terms = {{1.0, TrigFactor::one(), TrigFactor::cos(1)}};
        bad.x_cancel = true;
        CHECK(bad.x_cancellation_residual() > 0.5);
        CHECK_THROWS(bad.check_flags());
    }

    TEST_CASE("growth norm is homogeneous and bounded by the sup norm")
    {
        const auto tf = TestFunctionPair::mixed(1.0);
        const GrowthNorm g1 = growth_norm(tf);
        const GrowthNorm g2 = growth_norm(tf.scaled(0.25));
        CHECK(g2.value == doctest::Approx(0.25 * g1.value).epsilon(1e-9));
        CHECK(g1.value <= g1.sup + 1e-12);
        CHECK(g1.value > 0.0);
        CHECK(sup_norm(TestFunctionPair::shifted_cos(0.1)) == doctest::Approx(0.1).epsilon(1e-9));
    }

    TEST_CASE("quadrature matches a tensor-product oracle")
    {
        const auto psi = TestFunctionPair::shifted_cos(0.1);
        const auto phi = TestFunctionPair::mixed(0.02);
        const auto nonuniform = TestFunctionPair::centered_nonuniform(0.05);
        for (int N : {1, 2, 3}) {
            const double a = partition_quadrature(psi, N, PartitionVariant::SquaredSum, 32);
            CHECK(a == doctest::Approx(brute_force(psi, N, 32, [&](const auto& x) { return squared_sum(psi, x); })).epsilon(1e-10));
            const double b = partition_quadrature(phi, N, PartitionVariant::DoubleSum, 32);
            CHECK(b == doctest::Approx(brute_force(phi, N, 32, [&](const auto& x) { return double_sum(phi, x); })).epsilon(1e-10));
            const double c = partition_quadrature(nonuniform, N, PartitionVariant::DoubleSum, 32);
            CHECK(c == doctest::Approx(brute_force(nonuniform, N, 32, [&](const auto& x) { return double_sum(nonuniform, x); }))
                           .epsilon(1e-10));
        }
        CHECK_THROWS_AS(partition_quadrature(psi, 5, PartitionVariant::SquaredSum, 32), InvalidArgument);
    }

    TEST_CASE("closed-form partition values")
    {
        const auto zero = TestFunctionPair::cos_cos(0.0);
        CHECK(partition_quadrature(zero, 3, PartitionVariant::DoubleSum, 16) == doctest::Approx(1.0));
        PartitionOptions o;
        const BoundReport r = partition_function(zero, 3, o);
        CHECK(r.bound == doctest::Approx(2.0));
        CHECK(r.pass);
        // N = 1: integral of exp(0.2 cos^2(2 pi x)) = e^0.1 I0(0.1)
        const auto phi = TestFunctionPair::cos_cos(0.2);
        const double expect = std::exp(0.1) * boost::math::cyl_bessel_i(0, 0.1);
        CHECK(expect == doctest::Approx(1.10794).epsilon(1e-5));
        CHECK(partition_quadrature(phi, 1, PartitionVariant::DoubleSum, 64) == doctest::Approx(expect).epsilon(1e-13));
        // gamma for eps = 0.2 is far above 1, so no bound is claimed
        CHECK_THROWS_AS(partition_function(phi, 1, o), OutOfHypothesis);
    }

    TEST_CASE("Monte Carlo agrees with quadrature")
    {
        const auto phi = TestFunctionPair::cos_cos(0.3);
        const double q = partition_quadrature(phi, 3, PartitionVariant::DoubleSum, 64);
        const MonteCarloEstimate mc = partition_monte_carlo(phi, 3, PartitionVariant::DoubleSum, 200000, 9);
        CHECK(mc.samples == 200000);
        CHECK(std::abs(mc.mean - q) < 4.0 * mc.std_error + 1e-12);
        const MonteCarloEstimate again = partition_monte_carlo(phi, 3, PartitionVariant::DoubleSum, 200000, 9);
        CHECK(again.mean == mc.mean);
    }

    TEST_CASE("partition reports compare against the right constant")
    {
        PartitionOptions o;
        o.variant = PartitionVariant::SquaredSum;
        const BoundReport r = partition_function(TestFunctionPair::shifted_cos(0.1), 3, o);
        CHECK(r.bound == doctest::Approx(squared_sum_bound(0.1)));
        CHECK(r.pass);
        o.variant = PartitionVariant::DoubleSum;
        // cos-cos at eps = 1 is far outside the small-gamma regime
        CHECK_THROWS_AS(partition_function(TestFunctionPair::cos_cos(1.0), 3, o), OutOfHypothesis);
    }

    TEST_CASE("cancellation integrals match the oracle")
    {
        const auto tf = TestFunctionPair::centered_nonuniform(1.0);
        const int N = 3;
        for (const auto& [I, J] : std::vector<std::pair<std::vector<int>, std::vector<int>>>{
                 {{1, 2}, {2, 1}}, {{1, 2}, {1, 1}}, {{1, 1}, {2, 3}}, {{1, 2, 2, 2}, {2, 3, 1, 1}}, {{1, 1, 2, 2}, {2, 2, 1, 1}}, {{1, 2, 3, 3}, {3, 3, 2, 1}}, {{1, 2, 3, 3}, {1, 2, 3, 3}}}) {
            const auto r = verify_cancellation(I, J, tf, N, 64);
            const double oracle = brute_force(tf, N, 64, [&](const std::vector<double>& x) {
                double p = 1.0;
                for (std::size_t v = 0; v < I.size(); ++v) p *= tf.eval(x[I[v] - 1], x[J[v] - 1]);
                return p;
            });
            CHECK(r.value == doctest::Approx(oracle).epsilon(1e-10).scale(1.0));
            const auto [m, n] = singleton_split(I, N);
            CHECK(r.m == m);
            CHECK(r.n == n);
            CHECK(r.in_j_set == in_j_set(J, N, m, n));
            if (!r.in_j_set) CHECK(std::abs(r.value) < 1e-8);
        }
    }

    TEST_CASE("change-of-law inequality")
    {
        const std::vector<double> p{0.5, 0.5}, zero{0.0, 0.0};
        const auto same = change_of_law_check(p, p, zero, 1.0, 3);
        CHECK(same.entropy == 0.0);
        CHECK(same.rhs == doctest::Approx(0.0).scale(1.0));
        CHECK(same.pass);
        const std::vector<double> rho{0.9, 0.1}, bar{0.2, 0.8}, phi{1.0, -2.0};
        for (double eta : {0.01, 0.1, 1.0, 10.0}) {
            const auto r = change_of_law_check(rho, bar, phi, eta, 4);
            CHECK(r.pass);
            CHECK(r.lhs == doctest::Approx(0.7));
        }
        // large N eta Phi stays finite through log-sum-exp
        const std::vector<double> huge{500.0, -500.0};
        CHECK(std::isfinite(change_of_law_check(rho, bar, huge, 5.0, 10).rhs));
        CHECK_THROWS_AS(change_of_law_check(rho, bar, phi, 0.0, 4), InvalidArgument);
    }
}
