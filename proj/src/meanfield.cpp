#include "chaoslab/meanfield.hpp"

#include "chaoslab/error.hpp"
#include "chaoslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace chaoslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Stepper {
public:
    Stepper(const PdeConfig& cfg, int n, int dim) : cfg_(cfg), n_(n), dim_(dim), fft_(Fft::get(n, dim))
    {
        cfg.validate(dim);
        if (cfg.kernel.kind() == KernelKind::SmoothFourier && 2 * cfg.kernel.fourier().max_wavenumber() >= n) {
            throw InvalidArgument("pde: grid does not resolve the kernel's Fourier modes");
        }
        const std::size_t m = fft_->spectral_size();
        wave_.resize(m * static_cast<std::size_t>(dim));
        mult_.assign(m * static_cast<std::size_t>(dim), Complex{});
        keep_.assign(m, 0);
        k2_.resize(m);
        int k[4] = {0, 0, 0, 0};
        for (std::size_t idx = 0; idx < m; ++idx) {
            fft_->wavevector(idx, k);
            double kk = 0.0;
            bool keep = true;
            for (int j = 0; j < dim; ++j) {
                wave_[idx * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)] = k[j];
                kk += static_cast<double>(k[j]) * k[j];
                if (3 * std::abs(k[j]) > n) keep = false;
            }
            k2_[idx] = kk;
            keep_[idx] = keep && !fft_->is_nyquist(k);
            if (!fft_->is_nyquist(k) && cfg.kernel.kind() != KernelKind::Zero) {
                const auto mk = cfg.kernel.multiplier(k);
                for (int j = 0; j < dim; ++j) mult_[idx * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)] = mk[static_cast<std::size_t>(j)];
            }
        }
        if (!cfg.force.empty()) {
            force_.assign(fft_->real_size() * static_cast<std::size_t>(dim), 0.0);
            GridField probe(n, dim, FieldKind::Scalar);
            double x[4] = {0, 0, 0, 0};
            for (std::size_t i = 0; i < fft_->real_size(); ++i) {
                probe.node_coords(i, x);
                const Vec f = cfg.force.eval(x);
                for (int j = 0; j < dim; ++j) force_[static_cast<std::size_t>(j) * fft_->real_size() + i] = f[static_cast<std::size_t>(j)];
            }
        }
    }

    std::size_t spectral_size() const { return fft_->spectral_size(); }
    const Fft& fft() const { return *fft_; }

    /// velocity u = F + K * f on the grid, component-major
    std::vector<double> velocity(const std::vector<Complex>& spec) const
    {
        const std::size_t r = fft_->real_size();
        std::vector<double> u(r * static_cast<std::size_t>(dim_), 0.0);
        if (cfg_.kernel.kind() != KernelKind::Zero) {
            std::vector<Complex> comp(spec.size());
            for (int j = 0; j < dim_; ++j) {
                for (std::size_t idx = 0; idx < spec.size(); ++idx) {
                    comp[idx] = mult_[idx * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j)] * spec[idx];
                }
                fft_->inverse(comp, std::span<double>(u.data() + static_cast<std::size_t>(j) * r, r));
            }
        }
        if (!force_.empty()) {
            for (std::size_t i = 0; i < u.size(); ++i) u[i] += force_[i];
        }
        return u;
    }

    double max_speed(const std::vector<double>& u) const
    {
        const std::size_t r = fft_->real_size();
        double best = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim_; ++j) s += u[static_cast<std::size_t>(j) * r + i] * u[static_cast<std::size_t>(j) * r + i];
            best = std::max(best, s);
        }
        return std::sqrt(best);
    }

    /// -div(f u), dealiased; also reports max |u|
    std::vector<Complex> advection(const std::vector<Complex>& spec, double* speed) const
    {
        const std::size_t r = fft_->real_size();
        std::vector<Complex> out(spec.size(), Complex{});
        if (cfg_.kernel.kind() == KernelKind::Zero && force_.empty()) {
            if (speed != nullptr) *speed = 0.0;
            return out;
        }
        const auto f = fft_->inverse(spec);
        const auto u = velocity(spec);
        if (speed != nullptr) *speed = max_speed(u);
        std::vector<double> flux(r);
        std::vector<Complex> fs(spec.size());
        for (int j = 0; j < dim_; ++j) {
            for (std::size_t i = 0; i < r; ++i) flux[i] = f[i] * u[static_cast<std::size_t>(j) * r + i];
            fft_->forward(flux, fs);
            for (std::size_t idx = 0; idx < spec.size(); ++idx) {
                if (!keep_[idx]) continue;
                const double kj = wave_[idx * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j)];
                out[idx] -= Complex(0.0, kTwoPi * kj) * fs[idx];
            }
        }
        out[0] = 0.0;
        return out;
    }

    void step(std::vector<Complex>& spec, double dt, double time) const
    {
        double speed = 0.0;
        const auto a = advection(spec, &speed);
        check_cfl(speed, dt, time);
        std::vector<Complex> mid(spec.size());
        std::vector<double> decay(spec.size());
        for (std::size_t idx = 0; idx < spec.size(); ++idx) {
            decay[idx] = std::exp(-cfg_.sigma * kTwoPi * kTwoPi * k2_[idx] * dt);
            mid[idx] = decay[idx] * (spec[idx] + dt * a[idx]);
        }
        const auto b = advection(mid, nullptr);
        for (std::size_t idx = 0; idx < spec.size(); ++idx) {
            spec[idx] = decay[idx] * spec[idx] + 0.5 * dt * (decay[idx] * a[idx] + b[idx]);
        }
    }

    void check_cfl(double speed, double dt, double time) const
    {
        const double courant = speed * dt * n_;
        if (!std::isfinite(courant)) throw NumericalError("pde: non-finite velocity at t = " + std::to_string(time));
        if (courant > cfg_.cfl_limit) {
            std::ostringstream msg;
            msg << "pde: CFL number " << courant << " exceeds " << cfg_.cfl_limit << " at t = " << time
                << "; reduce dt below " << cfg_.cfl_limit / (speed * n_);
            throw NumericalError(msg.str());
        }
    }

private:
    const PdeConfig& cfg_;
    int n_;
    int dim_;
    std::shared_ptr<const Fft> fft_;
    std::vector<double> wave_;
    std::vector<Complex> mult_;
    std::vector<char> keep_;
    std::vector<double> k2_;
    std::vector<double> force_;
};

void check_scalar_field(const GridField& f, const char* who)
{
    if (f.components != 1) throw InvalidArgument(std::string(who) + ": expected a scalar field");
    if (f.kind == FieldKind::Vector) throw InvalidArgument(std::string(who) + ": vector field given");
}

} // namespace

void PdeConfig::validate(int dim) const
{
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("pde: sigma must be finite and >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("pde: dt must be > 0");
    if (kernel.dim() != dim) throw InvalidArgument("pde: kernel dimension does not match field");
    if (!force.empty() && force.dim() != dim) throw InvalidArgument("pde: force dimension does not match field");
    if (!(cfl_limit > 0.0)) throw InvalidArgument("pde: cfl_limit must be > 0");
}

GridField vorticity_to_velocity(const GridField& omega, double alpha)
{
    if (omega.dim != 2 || omega.components != 1) throw InvalidArgument("vorticity_to_velocity: need a 2D scalar field");
    double scale = 1.0;
    for (double v : omega.values) scale = std::max(scale, std::abs(v));
    if (std::abs(omega.mean()) > 1e-12 * scale) {
        throw InvalidArgument("vorticity_to_velocity: vorticity must have zero mean");
    }
    const auto fft = Fft::get(omega.n, 2);
    const auto spec = fft->forward(omega.component(0));
    GridField u(omega.n, 2, FieldKind::Vector, 2);
    u.time = omega.time;
    std::vector<Complex> c1(spec.size()), c2(spec.size());
    int k[4] = {0, 0, 0, 0};
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        fft->wavevector(idx, k);
        const double kk = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1];
        if (kk == 0.0 || fft->is_nyquist(k)) {
            c1[idx] = c2[idx] = 0.0;
            continue;
        }
        c1[idx] = Complex(0.0, alpha * k[1] / kk) * spec[idx];
        c2[idx] = Complex(0.0, -alpha * k[0] / kk) * spec[idx];
    }
    fft->inverse(c1, u.component(0));
    fft->inverse(c2, u.component(1));
    return u;
}

GridField step_pde(const GridField& field, const PdeConfig& cfg)
{
    check_scalar_field(field, "step_pde");
    const Stepper stepper(cfg, field.n, field.dim);
    auto spec = stepper.fft().forward(field.component(0));
    stepper.step(spec, cfg.dt, field.time);
    GridField out = field;
    stepper.fft().inverse(spec, out.component(0));
    out.time = field.time + cfg.dt;
    return out;
}

PdeDiagnostics diagnostics(const GridField& field, const PdeConfig& cfg)
{
    check_scalar_field(field, "diagnostics");
    const Stepper stepper(cfg, field.n, field.dim);
    PdeDiagnostics d;
    d.time = field.time;
    d.mass = field.integral();
    d.min = field.min();
    d.l2_energy = field.l2_squared();
    const auto spec = stepper.fft().forward(field.component(0));
    d.max_speed = stepper.max_speed(stepper.velocity(spec));
    return d;
}

PdeSolution solve(const GridField& init, const PdeConfig& cfg, const std::vector<double>& output_times,
                  double positivity_tol)
{
    check_scalar_field(init, "solve");
    if (init.kind == FieldKind::Density || init.kind == FieldKind::Vorticity) init.check_invariants(1e-10);
    std::vector<double> times = output_times;
    std::sort(times.begin(), times.end());
    for (double t : times) {
        if (!(t >= init.time) || !std::isfinite(t)) throw InvalidArgument("solve: output times must be >= initial time");
    }
    const Stepper stepper(cfg, init.n, init.dim);
    PdeSolution sol;
    auto spec = stepper.fft().forward(init.component(0));
    double time = init.time;
    GridField current = init;
    for (double target : times) {
        const double span = target - time;
        if (span > 1e-14) {
            const auto steps = static_cast<std::uint64_t>(std::ceil(span / cfg.dt - 1e-9));
            const double h = span / static_cast<double>(steps);
            for (std::uint64_t s = 0; s < steps; ++s) {
                stepper.step(spec, h, time);
                time += h;
                ++sol.steps;
            }
            time = target;
            stepper.fft().inverse(spec, current.component(0));
            current.time = time;
            if (init.kind == FieldKind::Density && current.min() < -positivity_tol) {
                throw NumericalError("solve: density minimum " + std::to_string(current.min()) + " below -" +
                                     std::to_string(positivity_tol) + " at t = " + std::to_string(time));
            }
        }
        sol.snapshots.push_back(current);
        sol.diagnostics.push_back(diagnostics(current, cfg));
    }
    return sol;
}

GridField density_on_grid(const FourierDensity& density, int n)
{
    GridField f(n, density.dim(), FieldKind::Density);
    double x[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.node_coords(i, x);
        f.values[i] = density.eval(x);
    }
    return f;
}

GridField taylor_green_vorticity(int n, double amplitude)
{
    GridField f(n, 2, FieldKind::Vorticity);
    double x[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.node_coords(i, x);
        f.values[i] = amplitude * std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]);
    }
    return f;
}

} // namespace chaoslab
