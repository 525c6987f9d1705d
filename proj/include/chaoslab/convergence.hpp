#pragma once

#include "chaoslab/meanfield.hpp"
#include "chaoslab/metrics.hpp"
#include "chaoslab/particles.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace chaoslab {

struct ConvergenceConfig {
    SimConfig sim;                  ///< particles field is ignored; see particle_counts
    std::vector<int> particle_counts{64, 128, 256, 512};
    int realizations = 400;
    std::uint64_t seed = 1;
    int pde_grid = 128;
    double pde_dt = 1e-3;
    EstimatorConfig estimator;
    int calibration_factor = 64;    ///< calibration sample size relative to the largest M N
    int bootstrap = 200;            ///< realization-resampling replicates per N
    void validate() const;
};

struct ConvergencePoint {
    int particles = 0;
    EntropyReport report;           ///< H_1 and raw L1 against the reference
    double l1_corrected = 0.0;      ///< raw L1 minus the calibration floor
    double iid_l1 = 0.0;            ///< L1 of an i.i.d. reference sample of the same size
    std::vector<double> replicates; ///< floor-corrected bootstrap L1 values
    std::uint64_t flagged_steps = 0;
    int rejected = 0;
    double seconds = 0.0;
};

struct ConvergenceStudy {
    GridField reference;            ///< cell averages of the PDE solution at T on the estimator grid
    PdeDiagnostics reference_diagnostics;
    double bias_floor = 0.0;
    std::vector<ConvergencePoint> points;
    RateFit fit;
    bool monotone = false;          ///< corrected L1 strictly decreasing in N
    double pde_seconds = 0.0;
};

/// Solves the limit equation to the final time and returns cell averages on the estimator grid.
GridField reference_density(const ConvergenceConfig& cfg, PdeDiagnostics* diag = nullptr);

/// Draws `count` i.i.d. points from a piecewise-constant density given by cell averages.
std::vector<double> sample_cells(const GridField& cells, std::uint64_t count, std::uint64_t seed);

/// Estimator bias floor: L1 between the estimate from a large i.i.d. sample of the reference
/// and the reference itself, extrapolated in sample size S as b + c / sqrt(S) from S and 4S.
double calibration_floor(const GridField& reference, const EstimatorConfig& est, std::uint64_t samples,
                         std::uint64_t seed);

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the ensemble for each N, compares first marginals against the reference and fits
/// the log-log slope of the floor-corrected L1 error.
ConvergenceStudy run_convergence_study(const ConvergenceConfig& cfg, const ProgressFn& progress = {});

} // namespace chaoslab
