#include "chaoslab/error.hpp"
#include "chaoslab/particles.hpp"

#include <doctest.h>
#include <omp.h>

#include <algorithm>
#include <ctime>
#include <cmath>
#include <numbers>

using namespace chaoslab;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ParticleState random_state(int n, std::uint64_t seed)
{
    ParticleState s(2, n);
    RngStream rng(CounterRng(seed), 0);
    for (double& x : s.positions) x = rng.uniform();
    return s;
}

double seconds_for_drift(const ParticleState& s, const Kernel& k, const FourierVectorField& f)
{
    // thread CPU time, so other processes on the machine do not distort the ratio
    auto now = [] {
        timespec ts{};
        clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
        return double(ts.tv_sec) + 1e-9 * double(ts.tv_nsec);
    };
    const double t0 = now();
    const auto d = pairwise_drift(s, k, f);
    const double dt = now() - t0;
    REQUIRE(std::isfinite(d[0]));
    return dt;
}

} // namespace

TEST_SUITE("particles")
{
    TEST_CASE("fast pair sums match the direct double loop")
    {
        const ParticleState s = random_state(300, 1);
        const FourierVectorField force = FourierVectorField::from_stream_function({{{0, 1}, 0.2, 0.0}});
        const Kernel kernels[] = {Kernel::biot_savart(), Kernel::biot_savart(Kernel::kDefaultAlpha, 0.02),
                                  Kernel::smooth_fourier(FourierVectorField::from_stream_function(
                                      {{{1, 0}, 1.0, 0.0}, {{1, 1}, 0.0, 0.5}, {{2, -1}, 0.3, 0.1}}))};
        for (const auto& k : kernels) {
            const auto fast = pairwise_drift(s, k, force);
            const auto slow = pairwise_drift_direct(s, k, force);
            REQUIRE(fast.size() == slow.size());
            for (std::size_t i = 0; i < fast.size(); ++i) REQUIRE(fast[i] == doctest::Approx(slow[i]).epsilon(1e-9).scale(1.0));
        }
    }

    TEST_CASE("hand-evaluated drifts")
    {
        ParticleState one(2, 1);
        one.positions = {0.3, 0.7};
        const auto d0 = pairwise_drift(one, Kernel::biot_savart(), FourierVectorField(2, {}));
        CHECK(d0[0] == 0.0);
        CHECK(d0[1] == 0.0);

        ParticleState two(1, 2);
        two.positions = {0.25, 0.0};
        const Kernel sine = Kernel::smooth_fourier(FourierVectorField(1, {VectorMode{{1, 0}, {1.0, 0.0}, {0.0, 0.0}}}));
        const auto d = pairwise_drift(two, sine, FourierVectorField(1, {}));
        CHECK(d[0] == doctest::Approx(0.5));
        CHECK(d[1] == doctest::Approx(-0.5));
    }

    TEST_CASE("antisymmetric interactions conserve the mean drift")
    {
        const ParticleState s = random_state(500, 2);
        const auto d = pairwise_drift(s, Kernel::biot_savart(), FourierVectorField(2, {}));
        double sx = 0.0, sy = 0.0, scale = 0.0;
        for (int i = 0; i < s.count; ++i) {
            sx += d[2 * i];
            sy += d[2 * i + 1];
            scale += std::abs(d[2 * i]);
        }
        CHECK(std::abs(sx) < 1e-10 * scale);
        CHECK(std::abs(sy) < 1e-10 * scale);
    }

    TEST_CASE("free diffusion has the heat-kernel characteristic function")
    {
        SimConfig cfg;
        cfg.sigma = 0.1;
        cfg.dt = 0.01;
        cfg.final_time = 0.2;
        cfg.particles = 4000;
        const ParticleState start = initial_state(cfg, 9);
        const Trajectory tr = simulate_from(start, cfg, 9);
        REQUIRE(tr.snapshots.size() == 1);
        CHECK(tr.snapshots[0].time == doctest::Approx(0.2));
        CHECK(tr.steps == 20);
        double acc = 0.0;
        for (std::size_t i = 0; i < start.positions.size(); ++i) {
            acc += std::cos(kTwoPi * (tr.snapshots[0].positions[i] - start.positions[i]));
        }
        const double expect = std::exp(-4.0 * std::numbers::pi * std::numbers::pi * cfg.sigma * cfg.final_time);
        CHECK(acc / double(start.positions.size()) == doctest::Approx(expect).epsilon(0.06));
    }

    TEST_CASE("ensembles are bitwise reproducible across thread counts")
    {
        SimConfig cfg;
        cfg.kernel = Kernel::biot_savart();
        cfg.initial = FourierDensity::taylor_green(0.5);
        cfg.sigma = 0.1;
        cfg.dt = 0.005;
        cfg.final_time = 0.05;
        cfg.particles = 64;
        cfg.output_times = {0.0, 0.025, 0.05};
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
        const Ensemble a = run_ensemble(cfg, 6, 123);
        omp_set_num_threads(4);
        const Ensemble b = run_ensemble(cfg, 6, 123);
        omp_set_num_threads(saved);
        const Ensemble c = run_ensemble(cfg, 6, 124);
        REQUIRE(a.times == b.times);
        for (int m = 0; m < 6; ++m)
            for (std::size_t t = 0; t < a.times.size(); ++t) REQUIRE(a.snapshots[t][m].positions == b.snapshots[t][m].positions);
        CHECK(a.snapshots[2][0].positions != c.snapshots[2][0].positions);
        CHECK(a.snapshots[0][0].time == 0.0);
    }

    TEST_CASE("Euler-Maruyama converges with weak order one under coupled noise")
    {
        // 1D drift 0.5 sin(2 pi x), test function cos(2 pi x); coarse steps reuse sums of fine increments
        SimConfig cfg;
        cfg.kernel = Kernel::zero(1);
        cfg.force = FourierVectorField(1, {VectorMode{{1, 0}, {0.5, 0.0}, {0.0, 0.0}}});
        cfg.initial = FourierDensity::uniform(1);
        cfg.sigma = 0.05;
        const int paths = 4000;
        const int fine_steps = 512;
        const double T = 1.0;
        const NoiseSource noise(77);

        auto run = [&](int ratio) {
            ParticleState s(1, paths);
            std::fill(s.positions.begin(), s.positions.end(), 0.1);
            std::vector<double> fine(static_cast<std::size_t>(paths)), xi(fine.size());
            const double h = T * ratio / fine_steps;
            for (int n = 0; n < fine_steps / ratio; ++n) {
                std::fill(xi.begin(), xi.end(), 0.0);
                for (int r = 0; r < ratio; ++r) {
                    noise.fill(static_cast<std::uint64_t>(n * ratio + r), paths, 1, fine);
                    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] += fine[i];
                }
                for (double& v : xi) v /= std::sqrt(double(ratio));
                s = step_with_noise(s, cfg, h, xi);
            }
            double acc = 0.0;
            for (double x : s.positions) acc += std::cos(kTwoPi * x);
            return acc / paths;
        };
        const double ref = run(1);
        const double e1 = std::abs(run(64) - ref);
        const double e2 = std::abs(run(32) - ref);
        const double e3 = std::abs(run(16) - ref);
        MESSAGE("weak errors " << e1 << " " << e2 << " " << e3);
        CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.35));
        CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.35));
    }

    TEST_CASE("pair evaluation cost grows quadratically")
    {
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
        const Kernel k = Kernel::biot_savart();
        const FourierVectorField none(2, {});
        const ParticleState small = random_state(1024, 5), large = random_state(2048, 6);
        // interleaved repetitions, minimum of each
        double t1 = 1e300, t2 = 1e300;
        for (int rep = 0; rep < 9; ++rep) {
            t1 = std::min(t1, seconds_for_drift(small, k, none));
            t2 = std::min(t2, seconds_for_drift(large, k, none));
        }
        omp_set_num_threads(saved);
        MESSAGE("N=1024: " << t1 << " s, N=2048: " << t2 << " s");
        CHECK(t2 / t1 >= 3.4);
        CHECK(t2 / t1 <= 4.6);
    }

    TEST_CASE("large drifts are flagged and can reject a realization")
    {
        SimConfig cfg;
        cfg.kernel = Kernel::biot_savart(Kernel::kDefaultAlpha, 0.0);
        cfg.initial = FourierDensity::uniform(2);
        cfg.dt = 0.05;
        cfg.final_time = 0.5;
        cfg.particles = 200;
        cfg.flag_threshold = 1e-3;
        cfg.reject_flagged = true;
        const Ensemble e = run_ensemble(cfg, 3, 1);
        CHECK(e.flagged_steps > 0);
        CHECK(e.accepted() == 0);
        CHECK(std::all_of(e.rejected.begin(), e.rejected.end(), [](bool r) { return r; }));
    }

    TEST_CASE("configuration validation")
    {
        SimConfig cfg;
        cfg.sigma = -1.0;
        CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
        cfg.sigma = 0.1;
        cfg.output_times = {2.0};
        CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
        cfg.output_times = {};
        cfg.force = FourierVectorField(1, {VectorMode{{1, 0}, {1.0, 0.0}, {0.0, 0.0}}});
        CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    }
}
