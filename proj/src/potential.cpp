#include "chaoslab/potential.hpp"

#include "chaoslab/biot_savart.hpp"
#include "chaoslab/error.hpp"
#include "chaoslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chaoslab {

namespace {

constexpr double kPi = std::numbers::pi;

// smooth step s(t): 0 for t <= 0, 1 for t >= 1
double smooth_step(double t)
{
    auto f = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    const double a = f(t);
    const double b = f(1.0 - t);
    return a / (a + b);
}

double smooth_step_derivative(double t)
{
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    const double da = a / (t * t);
    const double db = -b / ((1.0 - t) * (1.0 - t));
    return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

// continuous zero-mean antiderivative of the sawtooth line mean of the kernel
double sawtooth_potential(double x) { return std::abs(x) - x * x - 1.0 / 6.0; }

// branch convention: arctan(a/b) at b = 0 takes the one-sided limit sign(a) pi/2
double arctan_ratio(double a, double b)
{
    if (b == 0.0) return a == 0.0 ? 0.0 : std::copysign(kPi / 2.0, a);
    return std::atan(a / b);
}

} // namespace

double BumpFunction::value(double r) const { return 1.0 - smooth_step((r - inner) / (outer - inner)); }

double BumpFunction::derivative(double r) const
{
    return -smooth_step_derivative((r - inner) / (outer - inner)) / (outer - inner);
}

PotentialMatrix build_biot_savart_potential(int n, double alpha)
{
    if (n < 32 || (n & (n - 1)) != 0) {
        throw InvalidArgument("build_biot_savart_potential: grid size must be a power of two >= 32 to resolve the bump");
    }
    const BumpFunction bump;
    const PeriodicBiotSavart exact;
    PotentialMatrix v;
    v.n = n;
    v.alpha = alpha;
    const std::size_t size = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    for (auto& row : v.entries)
        for (auto& e : row) e.assign(size, 0.0);

    // f1 = K1 - d1(-alpha phi arctan(x1/x2)), f2 = K2 - d2(alpha phi arctan(x2/x1)),
    // written so the free-space singularity cancels analytically.
    std::vector<double> f1(size), f2(size);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x[2] = {v.coordinate(i), v.coordinate(j)};
            const double r = std::hypot(x[0], x[1]);
            const double rr = r * r;
            const double phi = bump.value(r);
            const double dphi = bump.derivative(r);
            const double d1phi = dphi * x[0] / r;
            const double d2phi = dphi * x[1] / r;
            const Vec rem = exact.remainder(x);
            const std::size_t idx = static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j);
            f1[idx] = alpha * (rem[0] + (phi - 1.0) * x[1] / rr + d1phi * arctan_ratio(x[0], x[1]));
            f2[idx] = alpha * (rem[1] + (1.0 - phi) * x[0] / rr - d2phi * arctan_ratio(x[1], x[0]));
            v.entries[0][0][idx] = -alpha * phi * arctan_ratio(x[0], x[1]);
            v.entries[1][1][idx] = alpha * phi * arctan_ratio(x[1], x[0]);
            v.entries[0][1][idx] = -alpha * kPi * sawtooth_potential(x[1]);
            v.entries[1][0][idx] = alpha * kPi * sawtooth_potential(x[0]);
        }
    }

    // line-wise spectral antiderivatives: psi11 along x1 (fixed j), psi22 along x2 (fixed i)
    const auto fft = Fft::get(n, 1);
    std::vector<double> line(static_cast<std::size_t>(n));
    std::vector<Complex> spec(fft->spectral_size());
    auto integrate_line = [&](std::vector<double>& data) {
        fft->forward(data, spec);
        spec[0] = 0.0;
        spec[static_cast<std::size_t>(n / 2)] = 0.0;
        for (int k = 1; k < n / 2; ++k) spec[static_cast<std::size_t>(k)] /= Complex(0.0, 2.0 * kPi * k);
        fft->inverse(spec, data);
    };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = f1[static_cast<std::size_t>(i * n + j)];
        integrate_line(line);
        for (int i = 0; i < n; ++i) v.entries[0][0][static_cast<std::size_t>(i * n + j)] += line[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = f2[static_cast<std::size_t>(i * n + j)];
        integrate_line(line);
        for (int j = 0; j < n; ++j) v.entries[1][1][static_cast<std::size_t>(i * n + j)] += line[static_cast<std::size_t>(j)];
    }

    for (const auto& row : v.entries)
        for (const auto& e : row)
            for (double x : e) v.norm_inf = std::max(v.norm_inf, std::abs(x));
    return v;
}

DivergenceResidual divergence_residual(const PotentialMatrix& v, double exclusion_radius)
{
    const int n = v.n;
    const double h = 1.0 / n;
    const PeriodicBiotSavart exact;
    DivergenceResidual res;
    auto wrap = [n](int i) { return (i % n + n) % n; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double x[2] = {v.coordinate(i), v.coordinate(j)};
            if (std::hypot(x[0], x[1]) < exclusion_radius) continue;
            // stencils crossing x1 = 0 or x2 = 0 see the kinks of the off-diagonal entries
            if (std::abs(x[0]) < 1.5 * h || std::abs(x[1]) < 1.5 * h) continue;
            const double div1 = (v.at(0, 0, wrap(i + 1), j) - v.at(0, 0, wrap(i - 1), j)) / (2 * h) +
                                (v.at(0, 1, i, wrap(j + 1)) - v.at(0, 1, i, wrap(j - 1))) / (2 * h);
            const double div2 = (v.at(1, 0, wrap(i + 1), j) - v.at(1, 0, wrap(i - 1), j)) / (2 * h) +
                                (v.at(1, 1, i, wrap(j + 1)) - v.at(1, 1, i, wrap(j - 1))) / (2 * h);
            const Vec k = exact.velocity(x);
            const double kx = v.alpha * k[0];
            const double ky = v.alpha * k[1];
            res.max_residual = std::max(res.max_residual, std::hypot(div1 - kx, div2 - ky));
            res.kernel_norm = std::max(res.kernel_norm, std::hypot(kx, ky));
            ++res.tested;
        }
    }
    return res;
}

} // namespace chaoslab
