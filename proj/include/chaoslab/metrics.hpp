#pragma once

#include "chaoslab/grid_field.hpp"
#include "chaoslab/particles.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace chaoslab {

enum class EstimatorKind { Histogram, Kde };
std::string to_string(EstimatorKind kind);
EstimatorKind estimator_kind_from_string(const std::string& name);

struct EstimatorConfig {
    EstimatorKind kind = EstimatorKind::Histogram;
    int bins = 64;                      ///< cells per axis of the output grid
    double bandwidth = 0.0;             ///< KDE only; 0 selects 1.06 std (samples)^(-1/(D+4)) per axis
    std::size_t pair_budget = 10000000; ///< k = 2: max ordered pairs pooled
    std::uint64_t seed = 0;             ///< k = 2 pair subsampling
};

/// Estimated k-particle marginal as a density on (T^d)^k (grid dimension k d).
/// Entry i holds the estimated mean density over cell i.
struct MarginalEstimate {
    int k = 1;
    GridField density;
    EstimatorKind estimator = EstimatorKind::Histogram;
    std::size_t sample_count = 0;
    double bin_width = 0.0;
    std::vector<double> bandwidth;  ///< per axis, KDE only
};

/// Density estimate from pooled points (count x dim coordinates in [0,1)).
MarginalEstimate estimate_density(std::span<const double> points, int dim, const EstimatorConfig& cfg);

/// k = 1 pools every particle of every accepted realization at output time t;
/// k = 2 pools ordered distinct pairs within each realization, subsampled to the budget with
/// an equal share per realization.
MarginalEstimate estimate_marginal(const Ensemble& ensemble, std::size_t time_index, int k,
                                   const EstimatorConfig& cfg);
MarginalEstimate estimate_marginal(std::span<const ParticleState> samples, int k, const EstimatorConfig& cfg);

/// f tensor f on a grid of dimension 2 dim.
GridField tensor_square(const GridField& f);

/// (1/k) sum p log(p/q) cell_volume with 0 log 0 = 0. q is clamped at `floor`; a cell with
/// p > 0 and q < floor throws InvalidArgument (support mismatch).
double relative_entropy(const GridField& p, const GridField& q, int k, double floor = 1e-12);

double l1_distance(const GridField& p, const GridField& q);

struct EntropyReport {
    double entropy = 0.0;   ///< H_k
    double l1 = 0.0;
    double ckp_rhs = 0.0;   ///< sqrt(2 k H_k)
    int particles = 0;
    int realizations = 0;
    int k = 1;
    double time = 0.0;
    std::string estimator = "histogram";
    int bins = 0;
    std::uint64_t seed = 0;
};

EntropyReport entropy_report(const GridField& p, const GridField& q, int k);

/// L1 <= sqrt(2 k H_k) + 1e-10.
bool ckp_check(const EntropyReport& report);

struct RatePoint {
    double n = 0.0;
    double error = 0.0;
    std::vector<double> replicates;  ///< bootstrap replicates of the error, may be empty
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;  ///< log error at log N = 0
    double ci_low = 0.0;
    double ci_high = 0.0;
    int bootstrap_samples = 0;
    std::vector<RatePoint> points;
};

/// Least-squares slope of log error against log N. The 95% interval comes from refitting on
/// bootstrap replicates drawn per point (or on resampled residuals when a point has none).
RateFit fit_rate(const std::vector<RatePoint>& points, int bootstrap = 2000, std::uint64_t seed = 1);

/// Ordinary least squares slope and intercept.
std::pair<double, double> least_squares(std::span<const double> x, std::span<const double> y);

} // namespace chaoslab
