#include "chaoslab/particles.hpp"

#include "chaoslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace chaoslab {

namespace {

constexpr std::uint64_t kInitialStream = 0x8000000000000011ULL;
constexpr int kPairBufferMaxParticles = 2048;

/// minimal image of a difference of two coordinates in [0,1); same result as minimal_image
inline double near_image(double r)
{
    return r - static_cast<double>(r >= 0.5) + static_cast<double>(r < -0.5);
}

void add_force(const ParticleState& s, const FourierVectorField& force, std::vector<double>& drift)
{
    if (force.empty()) return;
    const int d = s.dim;
    for (int i = 0; i < s.count; ++i) {
        const Vec f = force.eval(s.position(i));
        for (int c = 0; c < d; ++c) drift[static_cast<std::size_t>(i * d + c)] += f[static_cast<std::size_t>(c)];
    }
}

void check_dims(const ParticleState& s, const Kernel& k, const FourierVectorField& force)
{
    if (s.dim != k.dim()) throw InvalidArgument("pairwise_drift: kernel dimension does not match state");
    if (!force.empty() && force.dim() != s.dim) throw InvalidArgument("pairwise_drift: force dimension does not match state");
}

// Antisymmetric kernels: evaluate each unordered pair once into a buffer, then accumulate
// every row in increasing j so the sum order is fixed regardless of threading.
void pair_sum_antisymmetric(const ParticleState& s, const Kernel& k, std::vector<double>& drift)
{
    const int n = s.count;
    const int d = s.dim;
    const auto row_offset = [n](int i) {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * n - i - 1) / 2;
    };
    // every entry is written below, so a grown-only per-thread buffer avoids refaulting pages each step
    thread_local std::vector<double> buffer;
    const std::size_t need = row_offset(n - 1) * 2 + 2;
    if (buffer.size() < need) buffer.resize(need);
    double* const pairs = buffer.data();
    const BiotSavartTable* table = k.kind() == KernelKind::BiotSavart && d == 2 ? k.table() : nullptr;
    const double alpha = k.alpha();
    const double delta2 = k.delta() * k.delta();
#pragma omp parallel for schedule(dynamic, 16) if (n >= 256)
    for (int i = 0; i < n; ++i) {
        const double* xi = s.position(i);
        double* out = &pairs[2 * row_offset(i)];
        if (table != nullptr) {
            for (int j = i + 1; j < n; ++j, out += 2) {
                const double* xj = s.position(j);
                const double r0 = near_image(xi[0] - xj[0]);
                const double r1 = near_image(xi[1] - xj[1]);
                const double rr = r0 * r0 + r1 * r1;
                if (rr == 0.0) {
                    out[0] = out[1] = 0.0;
                    continue;
                }
                const double f = alpha / (rr + delta2);
                const Vec rem = table->interpolate(r0, r1);
                out[0] = rem[0] - r1 * f;
                out[1] = rem[1] + r0 * f;
            }
            continue;
        }
        double r[2] = {0.0, 0.0};
        for (int j = i + 1; j < n; ++j) {
            const double* xj = s.position(j);
            for (int c = 0; c < d; ++c) r[c] = minimal_image(xi[c] - xj[c]);
            const Vec kv = k.eval(r);
            out[0] = kv[0];
            out[1] = kv[1];
            out += 2;
        }
    }
    // acc_i = -sum_{j<i} K(x_j - x_i) + sum_{j>i} K(x_i - x_j), summed in increasing j.
    // Column blocks are owned by one thread each and rows are streamed in order.
    std::vector<double> acc(2 * static_cast<std::size_t>(n), 0.0);
    constexpr int kBlock = 256;
    const int blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(dynamic, 1) if (n >= 256)
    for (int b = 0; b < blocks; ++b) {
        const int lo = b * kBlock;
        const int hi = std::min(n, lo + kBlock);
        for (int j = 0; j < hi - 1; ++j) {
            const int first = std::max(lo, j + 1);
            const double* p = &pairs[2 * (row_offset(j) + static_cast<std::size_t>(first - j - 1))];
            for (int i = first; i < hi; ++i, p += 2) {
                acc[2 * static_cast<std::size_t>(i)] -= p[0];
                acc[2 * static_cast<std::size_t>(i) + 1] -= p[1];
            }
        }
    }
    const double inv_n = 1.0 / n;
#pragma omp parallel for schedule(static) if (n >= 256)
    for (int i = 0; i < n; ++i) {
        double a0 = acc[2 * static_cast<std::size_t>(i)];
        double a1 = acc[2 * static_cast<std::size_t>(i) + 1];
        const double* p = &pairs[2 * row_offset(i)];
        for (int j = i + 1; j < n; ++j, p += 2) {
            a0 += p[0];
            a1 += p[1];
        }
        drift[static_cast<std::size_t>(i * d)] += a0 * inv_n;
        if (d == 2) drift[static_cast<std::size_t>(i * d + 1)] += a1 * inv_n;
    }
}

void pair_sum_full(const ParticleState& s, const Kernel& k, std::vector<double>& drift)
{
    const int n = s.count;
    const int d = s.dim;
    const double inv_n = 1.0 / n;
#pragma omp parallel for schedule(static) if (n >= 256)
    for (int i = 0; i < n; ++i) {
        const double* xi = s.position(i);
        double acc[2] = {0.0, 0.0};
        double r[2] = {0.0, 0.0};
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* xj = s.position(j);
            for (int c = 0; c < d; ++c) r[c] = minimal_image(xi[c] - xj[c]);
            const Vec kv = k.eval(r);
            acc[0] += kv[0];
            acc[1] += kv[1];
        }
        for (int c = 0; c < d; ++c) drift[static_cast<std::size_t>(i * d + c)] += acc[c] * inv_n;
    }
}

// sum_j K(x_i - x_j) for K = sum_m b_m sin(2 pi k_m.x) + c_m cos(2 pi k_m.x), minus the j = i term
void fourier_sum(const ParticleState& s, const FourierVectorField& field, std::vector<double>& drift)
{
    const int n = s.count;
    const int d = s.dim;
    const double inv_n = 1.0 / n;
    std::vector<double> sa(static_cast<std::size_t>(n)), ca(static_cast<std::size_t>(n));
    for (const auto& m : field.modes()) {
        double S = 0.0, C = 0.0;
        for (int i = 0; i < n; ++i) {
            const double* x = s.position(i);
            double th = 0.0;
            for (int c = 0; c < d; ++c) th += m.k[static_cast<std::size_t>(c)] * x[c];
            th *= 2.0 * std::numbers::pi;
            sa[static_cast<std::size_t>(i)] = std::sin(th);
            ca[static_cast<std::size_t>(i)] = std::cos(th);
            S += sa[static_cast<std::size_t>(i)];
            C += ca[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < n; ++i) {
            const double si = sa[static_cast<std::size_t>(i)];
            const double ci = ca[static_cast<std::size_t>(i)];
            const double sin_sum = si * C - ci * S;        // sum_j sin(a_i - a_j)
            const double cos_sum = ci * C + si * S - 1.0;  // sum_{j != i} cos(a_i - a_j)
            for (int c = 0; c < d; ++c) {
                drift[static_cast<std::size_t>(i * d + c)] +=
                    (m.sin_coef[static_cast<std::size_t>(c)] * sin_sum + m.cos_coef[static_cast<std::size_t>(c)] * cos_sum) *
                    inv_n;
            }
        }
    }
}

} // namespace

ParticleState::ParticleState(int dim_, int count_) : dim(dim_), count(count_)
{
    if (dim < 1 || dim > kMaxDim) throw InvalidArgument("ParticleState: dimension must be 1 or 2");
    if (count < 1) throw InvalidArgument("ParticleState: need at least one particle");
    positions.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(count), 0.0);
}

TorusPoint ParticleState::point(int i) const
{
    TorusPoint p;
    p.dim = dim;
    for (int c = 0; c < dim; ++c) p.coords[static_cast<std::size_t>(c)] = position(i)[c];
    return p;
}

void SimConfig::validate() const
{
    const int d = kernel.dim();
    if (!force.empty() && force.dim() != d) throw InvalidArgument("SimConfig: force dimension differs from kernel");
    if (initial.dim() != d) throw InvalidArgument("SimConfig: initial density dimension differs from kernel");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("SimConfig: sigma must be finite and >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("SimConfig: dt must be > 0");
    if (!(final_time > 0.0) || !std::isfinite(final_time)) throw InvalidArgument("SimConfig: T must be > 0");
    if (dt > final_time * (1.0 + 1e-12)) throw InvalidArgument("SimConfig: dt must not exceed T");
    if (particles < 1) throw InvalidArgument("SimConfig: N must be >= 1");
    for (double t : output_times) {
        if (!(t >= 0.0 && t <= final_time * (1.0 + 1e-12))) {
            throw InvalidArgument("SimConfig: output time " + std::to_string(t) + " outside [0, T]");
        }
    }
}

std::vector<double> SimConfig::resolved_output_times() const
{
    std::vector<double> t = output_times.empty() ? std::vector<double>{final_time} : output_times;
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

std::vector<double> pairwise_drift(const ParticleState& state, const Kernel& kernel, const FourierVectorField& force)
{
    check_dims(state, kernel, force);
    std::vector<double> drift(state.positions.size(), 0.0);
    add_force(state, force, drift);
    switch (kernel.kind()) {
    case KernelKind::Zero: break;
    case KernelKind::SmoothFourier: fourier_sum(state, kernel.fourier(), drift); break;
    case KernelKind::BiotSavart:
        if (state.count <= kPairBufferMaxParticles) pair_sum_antisymmetric(state, kernel, drift);
        else pair_sum_full(state, kernel, drift);
        break;
    }
    return drift;
}

std::vector<double> pairwise_drift_direct(const ParticleState& state, const Kernel& kernel,
                                          const FourierVectorField& force)
{
    check_dims(state, kernel, force);
    std::vector<double> drift(state.positions.size(), 0.0);
    add_force(state, force, drift);
    if (kernel.kind() != KernelKind::Zero) pair_sum_full(state, kernel, drift);
    return drift;
}

void NoiseSource::fill(std::uint64_t step, int count, int dim, std::span<double> out) const
{
    const std::uint64_t pairs_per_particle = static_cast<std::uint64_t>((dim + 1) / 2);
    for (int i = 0; i < count; ++i) {
        double* o = &out[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim)];
        for (std::uint64_t q = 0; q < pairs_per_particle; ++q) {
            double z0 = 0.0, z1 = 0.0;
            rng_.normal_pair(step, static_cast<std::uint64_t>(i) * pairs_per_particle + q, z0, z1);
            o[2 * q] = z0;
            if (2 * q + 1 < static_cast<std::uint64_t>(dim)) o[2 * q + 1] = z1;
        }
    }
}

ParticleState step_with_noise(const ParticleState& state, const SimConfig& cfg, double dt, std::span<const double> xi,
                              StepStats* stats)
{
    if (!(dt > 0.0)) throw InvalidArgument("step: dt must be > 0");
    if (xi.size() != state.positions.size()) throw InvalidArgument("step: noise size mismatch");
    const auto drift = pairwise_drift(state, cfg.kernel, cfg.force);
    const int d = state.dim;
    ParticleState next = state;
    next.time = state.time + dt;
    const double amp = std::sqrt(2.0 * cfg.sigma * dt);
    std::uint64_t flagged = 0;
    for (int i = 0; i < state.count; ++i) {
        double norm2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double v = drift[static_cast<std::size_t>(i * d + c)];
            if (!std::isfinite(v)) {
                throw NumericalError("step: non-finite drift for particle " + std::to_string(i) + " at t = " +
                                     std::to_string(state.time));
            }
            norm2 += v * v;
        }
        if (std::sqrt(norm2) * dt > cfg.flag_threshold) ++flagged;
        for (int c = 0; c < d; ++c) {
            const std::size_t idx = static_cast<std::size_t>(i * d + c);
            next.positions[idx] = wrap_coordinate(state.positions[idx] + drift[idx] * dt + amp * xi[idx]);
        }
    }
    if (stats != nullptr) {
        stats->flagged_particles += flagged;
        if (flagged > 0) ++stats->flagged_steps;
    }
    return next;
}

ParticleState step(const ParticleState& state, const SimConfig& cfg, const NoiseSource& noise,
                   std::uint64_t step_index, StepStats* stats)
{
    std::vector<double> xi(state.positions.size(), 0.0);
    if (cfg.sigma > 0.0) noise.fill(step_index, state.count, state.dim, xi);
    return step_with_noise(state, cfg, cfg.dt, xi, stats);
}

ParticleState initial_state(const SimConfig& cfg, std::uint64_t realization_seed)
{
    ParticleState s(cfg.dim(), cfg.particles);
    RngStream rng(CounterRng(realization_seed), kInitialStream);
    for (int i = 0; i < s.count; ++i) {
        const TorusPoint p = cfg.initial.sample(rng);
        for (int c = 0; c < s.dim; ++c) s.positions[static_cast<std::size_t>(i * s.dim + c)] = p.coords[static_cast<std::size_t>(c)];
    }
    return s;
}

Trajectory simulate_from(const ParticleState& start, const SimConfig& cfg, std::uint64_t realization_seed)
{
    cfg.validate();
    if (start.dim != cfg.dim()) throw InvalidArgument("simulate: initial state dimension mismatch");
    const NoiseSource noise(realization_seed);
    Trajectory traj;
    ParticleState state = start;
    std::vector<double> xi(state.positions.size(), 0.0);
    for (double target : cfg.resolved_output_times()) {
        const double span = target - state.time;
        if (span > 1e-12) {
            const auto steps = static_cast<std::uint64_t>(std::ceil(span / cfg.dt - 1e-9));
            const double h = span / static_cast<double>(steps);
            for (std::uint64_t s = 0; s < steps; ++s) {
                if (cfg.sigma > 0.0) noise.fill(traj.steps, state.count, state.dim, xi);
                state = step_with_noise(state, cfg, h, xi, &traj.stats);
                ++traj.steps;
            }
            state.time = target;
        }
        traj.snapshots.push_back(state);
    }
    return traj;
}

Trajectory simulate(const SimConfig& cfg)
{
    cfg.validate();
    return simulate_from(initial_state(cfg, cfg.seed), cfg, cfg.seed);
}

int Ensemble::accepted() const { return static_cast<int>(std::count(rejected.begin(), rejected.end(), false)); }

Ensemble run_ensemble(const SimConfig& cfg, int realizations, std::uint64_t base_seed)
{
    if (realizations < 1) throw InvalidArgument("run_ensemble: need M >= 1");
    cfg.validate();
    Ensemble ens;
    ens.times = cfg.resolved_output_times();
    ens.seeds.resize(static_cast<std::size_t>(realizations));
    for (int m = 0; m < realizations; ++m) ens.seeds[static_cast<std::size_t>(m)] = derive_seed(base_seed, static_cast<std::uint64_t>(m));
    ens.snapshots.assign(ens.times.size(), std::vector<ParticleState>(static_cast<std::size_t>(realizations)));
    ens.rejected.assign(static_cast<std::size_t>(realizations), false);
    std::vector<std::uint64_t> flagged(static_cast<std::size_t>(realizations), 0);
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
    for (int m = 0; m < realizations; ++m) {
        try {
            const std::uint64_t seed = ens.seeds[static_cast<std::size_t>(m)];
            Trajectory traj = simulate_from(initial_state(cfg, seed), cfg, seed);
            for (std::size_t t = 0; t < traj.snapshots.size(); ++t) {
                ens.snapshots[t][static_cast<std::size_t>(m)] = std::move(traj.snapshots[t]);
            }
            flagged[static_cast<std::size_t>(m)] = traj.stats.flagged_steps;
            if (cfg.reject_flagged && traj.stats.flagged_steps > 0) ens.rejected[static_cast<std::size_t>(m)] = true;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    for (auto f : flagged) ens.flagged_steps += f;
    return ens;
}

} // namespace chaoslab
