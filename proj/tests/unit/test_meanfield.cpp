#include "chaoslab/error.hpp"
#include "chaoslab/field_io.hpp"
#include "chaoslab/meanfield.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace chaoslab;

namespace {
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
}

TEST_SUITE("meanfield")
{
    TEST_CASE("heat modes decay exactly")
    {
        PdeConfig cfg;
        cfg.sigma = 0.1;
        cfg.dt = 0.01;
        cfg.kernel = Kernel::zero(2);
        const FourierDensity rho(2, {ScalarMode{{1, 0}, 0.3, 0.0}, ScalarMode{{1, 2}, 0.0, 0.2}});
        const GridField init = density_on_grid(rho, 32);
        const PdeSolution sol = solve(init, cfg, {0.5, 1.0});
        REQUIRE(sol.snapshots.size() == 2);
        const GridField& f = sol.snapshots[1];
        const double a1 = 0.3 * std::exp(-4.0 * kPi2 * cfg.sigma * 1.0);
        const double a2 = 0.2 * std::exp(-4.0 * kPi2 * 5.0 * cfg.sigma * 1.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            double x[2];
            f.node_coords(i, x);
            const double expect = 1.0 + a1 * std::cos(2 * std::numbers::pi * x[0]) +
                                  a2 * std::sin(2 * std::numbers::pi * (x[0] + 2 * x[1]));
            worst = std::max(worst, std::abs(f.values[i] - expect));
        }
        CHECK(worst < 1e-6 * a1);
        CHECK(sol.steps == 100);
    }

    TEST_CASE("Taylor-Green vorticity decays at the viscous rate")
    {
        PdeConfig cfg;
        cfg.sigma = 0.05;
        cfg.dt = 1e-3;
        cfg.kernel = Kernel::biot_savart();
        const GridField w0 = taylor_green_vorticity(64, 1.0);
        const PdeSolution sol = solve(w0, cfg, {0.3});
        const double expect = std::exp(-8.0 * kPi2 * cfg.sigma * 0.3);
        CHECK(sol.snapshots[0].max() == doctest::Approx(expect).epsilon(1e-4));
        CHECK(sol.snapshots[0].mean() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }

    TEST_CASE("mass is conserved and Taylor-Green densities stay positive")
    {
        PdeConfig cfg;
        cfg.sigma = 0.1;
        cfg.dt = 1e-3;
        cfg.kernel = Kernel::biot_savart();
        const GridField init = density_on_grid(FourierDensity::taylor_green(0.5), 64);
        const PdeSolution sol = solve(init, cfg, {0.25, 0.5});
        CHECK(sol.steps == 500);
        double prev = init.l2_squared();
        for (const auto& d : sol.diagnostics) {
            CHECK(std::abs(d.mass - 1.0) < 1e-12);
            CHECK(d.min > 0.0);
            CHECK(d.l2_energy <= prev + 1e-12);
            prev = d.l2_energy;
        }
    }

    TEST_CASE("grid refinement changes smooth solutions by less than 1e-6")
    {
        PdeConfig cfg;
        cfg.sigma = 0.1;
        cfg.dt = 1e-3;
        cfg.kernel = Kernel::biot_savart();
        const auto rho = FourierDensity::taylor_green(0.5);
        const GridField coarse = solve(density_on_grid(rho, 64), cfg, {0.5}).snapshots[0];
        const GridField fine = solve(density_on_grid(rho, 128), cfg, {0.5}).snapshots[0];
        double worst = 0.0;
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) {
                const double a = coarse.values[static_cast<std::size_t>(i * 64 + j)];
                const double b = fine.values[static_cast<std::size_t>(2 * i * 128 + 2 * j)];
                worst = std::max(worst, std::abs(a - b));
            }
        CHECK(worst < 1e-6);
    }

    TEST_CASE("uniform density is stationary under an interaction")
    {
        PdeConfig cfg;
        cfg.sigma = 0.1;
        cfg.kernel = Kernel::biot_savart();
        const GridField u = density_on_grid(FourierDensity::uniform(2), 32);
        const GridField next = step_pde(u, cfg);
        for (double v : next.values) REQUIRE(v == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(next.time == doctest::Approx(cfg.dt));
    }

    TEST_CASE("CFL guard and field checks")
    {
        PdeConfig cfg;
        cfg.sigma = 0.0;
        cfg.dt = 0.5;
        cfg.kernel = Kernel::smooth_fourier(FourierVectorField::from_stream_function({{{1, 1}, 1.0, 0.0}}).scaled(10.0));
        const GridField init = density_on_grid(FourierDensity::taylor_green(0.5), 32);
        CHECK_THROWS_AS(solve(init, cfg, {1.0}), NumericalError);
        cfg.dt = -1.0;
        CHECK_THROWS_AS(solve(init, cfg, {1.0}), InvalidArgument);

        GridField omega(16, 2, FieldKind::Vorticity);
        std::fill(omega.values.begin(), omega.values.end(), 1.0);
        CHECK_THROWS_AS(vorticity_to_velocity(omega), InvalidArgument);
    }

    TEST_CASE("field files round trip")
    {
        const auto dir = std::filesystem::temp_directory_path() / "chaoslab-field-io-test";
        std::filesystem::create_directories(dir);
        GridField g = density_on_grid(FourierDensity::taylor_green(0.3), 8);
        g.time = 0.75;
        write_field_binary(dir / "g.bin", g);
        const GridField back = read_field_binary(dir / "g.bin");
        CHECK(back.n == 8);
        CHECK(back.dim == 2);
        CHECK(back.kind == FieldKind::Density);
        CHECK(back.time == 0.75);
        CHECK(back.values == g.values);

        write_field_csv(dir / "g.csv", g);
        std::ifstream is(dir / "g.csv");
        std::string header;
        std::getline(is, header);
        CHECK(header == "x1,x2,v1");
        int rows = 0;
        for (std::string line; std::getline(is, line);) ++rows;
        CHECK(rows == 64);

        std::ofstream(dir / "bad.bin") << "nope";
        CHECK_THROWS(read_field_binary(dir / "bad.bin"));
        std::filesystem::remove_all(dir);
    }
}
