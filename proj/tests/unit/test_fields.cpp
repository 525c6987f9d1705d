#include "chaoslab/error.hpp"
#include "chaoslab/fourier_field.hpp"
#include "chaoslab/grid_field.hpp"
#include "chaoslab/meanfield.hpp"
#include "chaoslab/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace chaoslab;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_SUITE("fields")
{
    TEST_CASE("stream-function fields are divergence free and odd when built from cosines")
    {
        const auto f = FourierVectorField::from_stream_function({{{1, 0}, 1.0, 0.0}, {{1, 2}, 0.3, 0.0}});
        CHECK(f.is_divergence_free());
        CHECK(f.is_odd());
        // psi = cos(2 pi x1): u = (d2 psi, -d1 psi) up to convention, so |u| peaks at 2 pi
        const double sup = FourierVectorField::from_stream_function({{{1, 0}, 1.0, 0.0}}).sup_norm();
        CHECK(sup == doctest::Approx(kTwoPi).epsilon(1e-3));
        CHECK(f.scaled(2.0).sup_norm() == doctest::Approx(2.0 * f.sup_norm()));
        CHECK(f.max_wavenumber() == 2);
    }

    TEST_CASE("a gradient field is not divergence free")
    {
        const FourierVectorField g(2, {VectorMode{{1, 0}, {1.0, 0.0}, {0.0, 0.0}}});
        CHECK_FALSE(g.is_divergence_free());
    }

    TEST_CASE("densities keep unit mass and reject negative amplitudes")
    {
        CHECK_THROWS_AS(FourierDensity(2, {ScalarMode{{0, 0}, 0.1, 0.0}}), InvalidArgument);
        CHECK_THROWS_AS(FourierDensity::taylor_green(1.5), InvalidArgument);
        const auto tg = FourierDensity::taylor_green(0.5);
        const double x[2] = {0.25, 0.25};
        CHECK(tg.eval(x) == doctest::Approx(1.5));
        const double lo[2] = {0.0, 0.0}, hi[2] = {1.0, 1.0};
        CHECK(tg.box_average(lo, hi) == doctest::Approx(1.0));
        const double qlo[2] = {0.0, 0.0}, qhi[2] = {0.5, 0.5};
        // average of sin sin over the first quadrant is (2/pi)^2
        CHECK(tg.box_average(qlo, qhi) == doctest::Approx(1.0 + 0.5 * 4.0 / (std::numbers::pi * std::numbers::pi)));

        const auto r = FourierDensity::random_band_limited(2, 2, 9, 0.5);
        CHECK(r.lower_bound() >= 0.5 - 1e-12);
        const GridField g = density_on_grid(r, 32);
        CHECK(g.mean() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.min() >= 0.5 - 1e-12);
    }

    TEST_CASE("rejection sampling matches the density (chi-squared)")
    {
        const auto tg = FourierDensity::taylor_green(0.8);
        RngStream rng(CounterRng(5), 1);
        const int bins = 8, n = 64000;
        std::vector<int> counts(bins * bins, 0);
        for (int s = 0; s < n; ++s) {
            const TorusPoint p = tg.sample(rng);
            const int i = std::min(bins - 1, static_cast<int>(p[0] * bins));
            const int j = std::min(bins - 1, static_cast<int>(p[1] * bins));
            ++counts[i * bins + j];
        }
        double chi2 = 0.0;
        for (int i = 0; i < bins; ++i)
            for (int j = 0; j < bins; ++j) {
                const double lo[2] = {double(i) / bins, double(j) / bins};
                const double hi[2] = {double(i + 1) / bins, double(j + 1) / bins};
                const double expected = n * tg.box_average(lo, hi) / (bins * bins);
                const double d = counts[i * bins + j] - expected;
                chi2 += d * d / expected;
            }
        // 63 degrees of freedom: the 99.9% quantile is about 103
        CHECK(chi2 < 103.0);
    }

    TEST_CASE("fft round trip and wavevector layout")
    {
        const auto fft = Fft::get(16, 2);
        std::vector<double> v(fft->real_size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * double(i)) + 0.1 * double(i % 5);
        const auto spec = fft->forward(v);
        const auto back = fft->inverse(spec);
        for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(back[i] == doctest::Approx(v[i]).epsilon(1e-12));
        int k[2];
        fft->wavevector(0, k);
        CHECK(k[0] == 0);
        CHECK(k[1] == 0);
    }

    TEST_CASE("cell averaging and coarsening conserve mass")
    {
        const GridField g = density_on_grid(FourierDensity::taylor_green(0.7), 64);
        const GridField c = cell_average(g);
        CHECK(c.mean() == doctest::Approx(g.mean()).epsilon(1e-12));
        const GridField coarse = coarsen(c, 4);
        CHECK(coarse.n == 16);
        CHECK(coarse.mean() == doctest::Approx(g.mean()).epsilon(1e-12));
        // exact cell average of 1 + a sin sin on the first coarse cell
        const double h = 1.0 / 16.0;
        const double s = (1.0 - std::cos(kTwoPi * h)) / (kTwoPi * h);
        CHECK(coarse.values[0] == doctest::Approx(1.0 + 0.7 * s * s).epsilon(1e-9));
        CHECK_THROWS_AS(coarsen(c, 3), InvalidArgument);
    }

    TEST_CASE("spectral divergence of a gradient is large, of a curl is tiny")
    {
        const int n = 32;
        GridField curl(n, 2, FieldKind::Vector, 2), grad(n, 2, FieldKind::Vector, 2);
        for (std::size_t idx = 0; idx < curl.size(); ++idx) {
            double x[2];
            curl.node_coords(idx, x);
            curl.component(0)[idx] = std::cos(kTwoPi * x[1]);
            curl.component(1)[idx] = std::sin(kTwoPi * x[0]);
            grad.component(0)[idx] = std::cos(kTwoPi * x[0]);
            grad.component(1)[idx] = 0.0;
        }
        CHECK(spectral_divergence_relative(curl) < 1e-12);
        CHECK(spectral_divergence_relative(grad) > 0.1);
    }
}
