#pragma once

#include "chaoslab/fourier_field.hpp"
#include "chaoslab/kernel.hpp"
#include "chaoslab/rng.hpp"
#include "chaoslab/torus.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace chaoslab {

/// Positions of N particles on the d-torus, stored flat as N*d coordinates in [0,1).
struct ParticleState {
    int dim = 1;
    int count = 0;
    double time = 0.0;
    std::vector<double> positions;

    ParticleState() = default;
    ParticleState(int dim, int count);

    TorusPoint point(int i) const;
    const double* position(int i) const { return &positions[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim)]; }
};

struct SimConfig {
    Kernel kernel = Kernel::zero(2);
    FourierVectorField force{2, {}};  ///< confinement F; empty means F = 0
    FourierDensity initial = FourierDensity::uniform(2);
    double sigma = 0.0;                ///< diffusion sigma_N >= 0
    double dt = 1e-3;
    double final_time = 1.0;
    int particles = 1;
    std::uint64_t seed = 0;
    std::vector<double> output_times;  ///< defaults to {final_time}; 0 means the initial state
    double flag_threshold = 0.25;      ///< |drift| dt above this flags the step
    bool reject_flagged = false;

    int dim() const { return kernel.dim(); }
    /// Throws InvalidArgument if dimensions disagree or parameters are out of range.
    void validate() const;
    std::vector<double> resolved_output_times() const;
};

struct StepStats {
    std::uint64_t flagged_particles = 0;
    std::uint64_t flagged_steps = 0;
};

/// drift_i = F(X_i) + (1/N) sum_j K(X_i - X_j) for every particle (N*d values).
/// O(N^2) pair evaluation parallel over particles; Fourier kernels use the exact
/// factorized form sum_j sin(a_i - a_j) = sin a_i C - cos a_i S instead.
std::vector<double> pairwise_drift(const ParticleState& state, const Kernel& kernel, const FourierVectorField& force);

/// Same as pairwise_drift but always evaluates every pair directly.
std::vector<double> pairwise_drift_direct(const ParticleState& state, const Kernel& kernel,
                                          const FourierVectorField& force);

/// Gaussian source for one realization: the noise of step s, particle i, coordinate c is
/// a pure function of (key, s, i, c).
class NoiseSource {
public:
    explicit NoiseSource(std::uint64_t key) : rng_(key) {}
    /// Fills out (N*d) with standard normals for step `step`.
    void fill(std::uint64_t step, int count, int dim, std::span<double> out) const;
    const CounterRng& rng() const { return rng_; }

private:
    CounterRng rng_;
};

/// One Euler-Maruyama step with externally supplied standard normals xi (N*d).
ParticleState step_with_noise(const ParticleState& state, const SimConfig& cfg, double dt, std::span<const double> xi,
                              StepStats* stats = nullptr);

/// One Euler-Maruyama step X <- wrap(X + drift dt + sqrt(2 sigma dt) xi), with xi drawn from
/// `noise` at counter `step_index`. Throws NumericalError naming the particle whose drift is
/// not finite.
ParticleState step(const ParticleState& state, const SimConfig& cfg, const NoiseSource& noise,
                   std::uint64_t step_index, StepStats* stats = nullptr);

/// Draws N i.i.d. positions from cfg.initial with the given realization seed.
ParticleState initial_state(const SimConfig& cfg, std::uint64_t realization_seed);

struct Trajectory {
    std::vector<ParticleState> snapshots;  ///< one per output time
    StepStats stats;
    std::uint64_t steps = 0;
};

/// Integrates from `start` through every output time; dt is shortened per segment so each
/// output time is hit exactly.
Trajectory simulate_from(const ParticleState& start, const SimConfig& cfg, std::uint64_t realization_seed);

/// simulate_from(initial_state(cfg, cfg.seed), cfg, cfg.seed).
Trajectory simulate(const SimConfig& cfg);

struct Ensemble {
    std::vector<double> times;
    std::vector<std::uint64_t> seeds;
    /// snapshots[t][m]: realization m at output time t
    std::vector<std::vector<ParticleState>> snapshots;
    std::vector<bool> rejected;
    std::uint64_t flagged_steps = 0;

    int realizations() const { return static_cast<int>(seeds.size()); }
    int accepted() const;
};

/// M independent realizations with seeds derive_seed(base_seed, m); parallel over
/// realizations, merged by index, so results do not depend on the thread count.
Ensemble run_ensemble(const SimConfig& cfg, int realizations, std::uint64_t base_seed);

} // namespace chaoslab
