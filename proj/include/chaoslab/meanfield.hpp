#pragma once

#include "chaoslab/fourier_field.hpp"
#include "chaoslab/grid_field.hpp"
#include "chaoslab/kernel.hpp"

#include <vector>

namespace chaoslab {

/// Settings for the mean-field equation d_t f + div(f (F + K * f)) = sigma Lap f.
struct PdeConfig {
    double sigma = 0.0;
    double dt = 1e-3;
    Kernel kernel = Kernel::zero(2);
    FourierVectorField force{2, {}};
    double cfl_limit = 0.5;  ///< max |u| dt / h allowed before a step is refused
    void validate(int dim) const;
};

/// u = K * omega for the periodic Biot-Savart law with constant alpha:
/// u_hat(k) = alpha (i k2, -i k1) / |k|^2 omega_hat(k). Requires a mean-zero 2D vorticity.
GridField vorticity_to_velocity(const GridField& omega, double alpha = Kernel::kDefaultAlpha);

/// One integrating-factor RK2 step of length cfg.dt. Advection is explicit with the 2/3 rule
/// applied to the flux, diffusion is exact, and the zero mode is never touched.
/// Throws NumericalError when max |u| dt / h exceeds cfg.cfl_limit.
GridField step_pde(const GridField& field, const PdeConfig& cfg);

struct PdeDiagnostics {
    double time = 0.0;
    double mass = 0.0;        ///< integral of the field
    double min = 0.0;         ///< min over grid nodes (inf of the density)
    double l2_energy = 0.0;   ///< integral of f^2
    double max_speed = 0.0;   ///< max |F + K * f| over grid nodes
};

PdeDiagnostics diagnostics(const GridField& field, const PdeConfig& cfg);

struct PdeSolution {
    std::vector<GridField> snapshots;
    std::vector<PdeDiagnostics> diagnostics;
    std::uint64_t steps = 0;
};

/// Integrates to every output time (sorted, each in [0, T]); the last step of each segment is
/// shortened so output times are hit exactly. Density runs fail with NumericalError if the
/// minimum drops below -positivity_tol.
PdeSolution solve(const GridField& init, const PdeConfig& cfg, const std::vector<double>& output_times,
                  double positivity_tol = 1e-8);

/// Nodal samples of a Fourier density on an n^d grid (kind Density).
GridField density_on_grid(const FourierDensity& density, int n);

/// amplitude * sin(2 pi x1) sin(2 pi x2) as a vorticity field.
GridField taylor_green_vorticity(int n, double amplitude = 1.0);

} // namespace chaoslab
