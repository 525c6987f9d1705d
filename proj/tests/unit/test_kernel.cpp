#include "chaoslab/biot_savart.hpp"
#include "chaoslab/error.hpp"
#include "chaoslab/kernel.hpp"
#include "chaoslab/meanfield.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace chaoslab;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_SUITE("kernel")
{
    TEST_CASE("Biot-Savart kernel is odd and matches the singular part near the origin")
    {
        const Kernel k = Kernel::biot_savart();
        RngStream rng(CounterRng(3), 0);
        for (int s = 0; s < 2000; ++s) {
            const double r[2] = {rng.uniform() - 0.5, rng.uniform() - 0.5};
            const double m[2] = {-r[0], -r[1]};
            const Vec a = k.eval(r), b = k.eval(m);
            REQUIRE(a[0] == doctest::Approx(-b[0]).epsilon(1e-12));
            REQUIRE(a[1] == doctest::Approx(-b[1]).epsilon(1e-12));
        }
        const double r[2] = {1e-3, 2e-3};
        const double rr = r[0] * r[0] + r[1] * r[1];
        const Vec v = k.eval(r);
        CHECK(v[0] == doctest::Approx(-k.alpha() * r[1] / rr).epsilon(1e-3));
        CHECK(v[1] == doctest::Approx(k.alpha() * r[0] / rr).epsilon(1e-3));
        const double zero[2] = {0.0, 0.0};
        CHECK(k.eval(zero)[0] == 0.0);
    }

    TEST_CASE("tabulated kernel agrees with the lattice sum and is periodic")
    {
        const Kernel k = Kernel::biot_savart(Kernel::kDefaultAlpha, 0.0, 256);
        const PeriodicBiotSavart exact;
        RngStream rng(CounterRng(4), 0);
        double worst = 0.0;
        for (int s = 0; s < 500; ++s) {
            const double r[2] = {rng.uniform() - 0.5, rng.uniform() - 0.5};
            if (r[0] * r[0] + r[1] * r[1] < 0.01) continue;
            const Vec a = k.eval(r);
            const Vec b = exact.velocity(r);
            worst = std::max(worst, std::hypot(a[0] - k.alpha() * b[0], a[1] - k.alpha() * b[1]));
        }
        CHECK(worst < 1e-4);
        // continuity across the cell boundary r1 = +-1/2
        const double left[2] = {-0.5 + 1e-9, 0.2}, right[2] = {0.5 - 1e-9, 0.2};
        CHECK(std::abs(k.eval(left)[0] - k.eval(right)[0]) < 1e-5);
        CHECK(std::abs(k.eval(left)[1] - k.eval(right)[1]) < 1e-5);
    }

    TEST_CASE("convolution of a vorticity shear gives the expected velocity sign")
    {
        const int n = 32;
        GridField omega(n, 2, FieldKind::Vorticity);
        for (std::size_t i = 0; i < omega.size(); ++i) {
            double x[2];
            omega.node_coords(i, x);
            omega.values[i] = std::sin(kTwoPi * x[0]);
        }
        const GridField u = convolve(Kernel::biot_savart(), omega);
        const GridField w = vorticity_to_velocity(omega);
        for (std::size_t i = 0; i < omega.size(); ++i) {
            double x[2];
            omega.node_coords(i, x);
            REQUIRE(u.component(0)[i] == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
            REQUIRE(u.component(1)[i] == doctest::Approx(-Kernel::kDefaultAlpha * std::cos(kTwoPi * x[0])).epsilon(1e-10));
            REQUIRE(w.component(1)[i] == doctest::Approx(u.component(1)[i]).epsilon(1e-12));
        }
        CHECK(spectral_divergence_relative(u) < 1e-12);
    }

    TEST_CASE("velocity induced by a perturbed density")
    {
        const int n = 32;
        GridField rho(n, 2, FieldKind::Density);
        for (std::size_t i = 0; i < rho.size(); ++i) {
            double x[2];
            rho.node_coords(i, x);
            rho.values[i] = 1.0 + 0.5 * std::sin(kTwoPi * x[0]);
        }
        const GridField u = convolve(Kernel::biot_savart(), rho);
        for (std::size_t i = 0; i < rho.size(); ++i) {
            double x[2];
            rho.node_coords(i, x);
            REQUIRE(std::abs(u.component(0)[i]) < 1e-14);
            REQUIRE(u.component(1)[i] == doctest::Approx(-std::cos(kTwoPi * x[0]) / (4.0 * std::numbers::pi)).epsilon(1e-12));
        }
    }

    TEST_CASE("regularized kernel is bounded")
    {
        const Kernel k = Kernel::biot_savart(Kernel::kDefaultAlpha, 0.05);
        double big = 0.0;
        for (double t = 1e-6; t < 0.5; t *= 1.5) {
            const double r[2] = {t, 0.0};
            big = std::max(big, std::abs(k.eval(r)[1]));
        }
        CHECK(big < Kernel::kDefaultAlpha / 0.05);
    }

    TEST_CASE("smooth Fourier kernel evaluates its field and vanishes at the origin")
    {
        const auto f = FourierVectorField::from_stream_function({{{1, 1}, 1.0, 0.0}});
        const Kernel k = Kernel::smooth_fourier(f);
        CHECK(k.divergence_free());
        CHECK(k.antisymmetric());
        const double r[2] = {0.1, 0.3};
        CHECK(k.eval(r)[0] == doctest::Approx(f.eval(r)[0]));
        const double z[2] = {0.0, 0.0};
        CHECK(k.eval(z)[0] == 0.0);
        const Kernel high = Kernel::smooth_fourier(FourierVectorField::from_stream_function({{{2, 1}, 1.0, 0.0}}));
        GridField rho(4, 2, FieldKind::Density);
        CHECK_THROWS_AS(convolve(high, rho), InvalidArgument);
    }

    TEST_CASE("table cache round trip")
    {
        const auto dir = std::filesystem::temp_directory_path() / "chaoslab-kernel-cache-test";
        std::filesystem::remove_all(dir);
        const Kernel a = Kernel::biot_savart(Kernel::kDefaultAlpha, 0.0, 64, dir);
        CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
        const Kernel b = Kernel::biot_savart(Kernel::kDefaultAlpha, 0.0, 64, dir);
        const double r[2] = {0.123, -0.321};
        CHECK(a.eval(r)[0] == b.eval(r)[0]);
        CHECK(a.eval(r)[1] == b.eval(r)[1]);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("invalid parameters are rejected")
    {
        CHECK_THROWS_AS(Kernel::biot_savart(std::nan("")), InvalidArgument);
        CHECK_THROWS_AS(Kernel::biot_savart(Kernel::kDefaultAlpha, -0.1), InvalidArgument);
        CHECK_THROWS_AS(Kernel::zero(3), InvalidArgument);
    }
}
