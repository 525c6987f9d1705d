#include "chaoslab/convergence.hpp"

#include "chaoslab/error.hpp"
#include "chaoslab/rng.hpp"
#include "chaoslab/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace chaoslab {

namespace {

constexpr double kReplicateFloor = 1e-12;

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

void ConvergenceConfig::validate() const
{
    sim.validate();
    if (particle_counts.size() < 3) throw InvalidArgument("convergence: need at least 3 particle counts");
    for (std::size_t i = 0; i < particle_counts.size(); ++i) {
        if (particle_counts[i] < 2) throw InvalidArgument("convergence: particle counts must be >= 2");
        if (i > 0 && particle_counts[i] <= particle_counts[i - 1]) {
            throw InvalidArgument("convergence: particle counts must be strictly increasing");
        }
    }
    if (realizations < 1) throw InvalidArgument("convergence: realizations must be >= 1");
    if (pde_grid < 8 || (pde_grid & (pde_grid - 1)) != 0) throw InvalidArgument("convergence: pde_grid must be a power of two >= 8");
    if (pde_grid % estimator.bins != 0) throw InvalidArgument("convergence: estimator bins must divide pde_grid");
    if (!(pde_dt > 0.0)) throw InvalidArgument("convergence: pde_dt must be > 0");
    if (calibration_factor < 1) throw InvalidArgument("convergence: calibration_factor must be >= 1");
    if (bootstrap < 0) throw InvalidArgument("convergence: bootstrap must be >= 0");
}

GridField reference_density(const ConvergenceConfig& cfg, PdeDiagnostics* diag)
{
    PdeConfig pde;
    pde.sigma = cfg.sim.sigma;
    pde.dt = cfg.pde_dt;
    pde.kernel = cfg.sim.kernel;
    pde.force = cfg.sim.force;
    const GridField init = density_on_grid(cfg.sim.initial, cfg.pde_grid);
    const PdeSolution sol = solve(init, pde, {cfg.sim.final_time});
    if (diag != nullptr) *diag = sol.diagnostics.back();
    GridField cells = coarsen(cell_average(sol.snapshots.back()), cfg.pde_grid / cfg.estimator.bins);
    cells.kind = FieldKind::Density;
    return cells;
}

std::vector<double> sample_cells(const GridField& cells, std::uint64_t count, std::uint64_t seed)
{
    const std::size_t m = cells.size();
    std::vector<double> cdf(m);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        acc += std::max(cells.values[i], 0.0);
        cdf[i] = acc;
    }
    if (!(acc > 0.0)) throw InvalidArgument("sample_cells: density has no mass");
    std::vector<double> pts(static_cast<std::size_t>(count) * static_cast<std::size_t>(cells.dim));
    const CounterRng rng(seed);
    const double h = 1.0 / cells.n;
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(count); ++s) {
        RngStream st(rng, static_cast<std::uint64_t>(s));
        const double u = st.uniform() * acc;
        std::size_t cell = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        cell = std::min(cell, m - 1);
        for (int j = cells.dim - 1; j >= 0; --j) {
            const auto idx = cell % static_cast<std::size_t>(cells.n);
            cell /= static_cast<std::size_t>(cells.n);
            pts[static_cast<std::size_t>(s) * static_cast<std::size_t>(cells.dim) + static_cast<std::size_t>(j)] =
                (static_cast<double>(idx) + st.uniform()) * h;
        }
    }
    return pts;
}

double calibration_floor(const GridField& reference, const EstimatorConfig& est, std::uint64_t samples,
                         std::uint64_t seed)
{
    EstimatorConfig cfg = est;
    cfg.bins = reference.n;
    const auto small = sample_cells(reference, samples / 4, derive_seed(seed, 1));
    const auto large = sample_cells(reference, samples, derive_seed(seed, 2));
    const double l1_small = l1_distance(estimate_density(small, reference.dim, cfg).density, reference);
    const double l1_large = l1_distance(estimate_density(large, reference.dim, cfg).density, reference);
    return std::max(0.0, 2.0 * l1_large - l1_small);
}

ConvergenceStudy run_convergence_study(const ConvergenceConfig& cfg, const ProgressFn& progress)
{
    cfg.validate();
    if (cfg.sim.dim() != 2 && cfg.sim.dim() != 1) throw InvalidArgument("convergence: dimension must be 1 or 2");
    auto say = [&](const std::string& s) {
        if (progress) progress(s);
    };
    ConvergenceStudy study;
    auto t0 = std::chrono::steady_clock::now();
    study.reference = reference_density(cfg, &study.reference_diagnostics);
    study.pde_seconds = seconds_since(t0);
    say("reference solved in " + std::to_string(study.pde_seconds) + " s");

    const std::uint64_t largest =
        static_cast<std::uint64_t>(cfg.particle_counts.back()) * static_cast<std::uint64_t>(cfg.realizations);
    study.bias_floor = calibration_floor(study.reference, cfg.estimator, largest * static_cast<std::uint64_t>(cfg.calibration_factor),
                                         derive_seed(cfg.seed, 0xca1bULL));
    say("calibration floor " + std::to_string(study.bias_floor));

    std::vector<RatePoint> rate_points;
    for (std::size_t idx = 0; idx < cfg.particle_counts.size(); ++idx) {
        const int n = cfg.particle_counts[idx];
        t0 = std::chrono::steady_clock::now();
        SimConfig sim = cfg.sim;
        sim.particles = n;
        sim.output_times = {sim.final_time};
        const std::uint64_t base = derive_seed(cfg.seed, static_cast<std::uint64_t>(n));
        const Ensemble ens = run_ensemble(sim, cfg.realizations, base);
        ConvergencePoint pt;
        pt.particles = n;
        pt.flagged_steps = ens.flagged_steps;
        pt.rejected = ens.realizations() - ens.accepted();
        const MarginalEstimate est = estimate_marginal(ens, 0, 1, cfg.estimator);
        pt.report = entropy_report(est.density, study.reference, 1);
        pt.report.particles = n;
        pt.report.realizations = ens.accepted();
        pt.report.estimator = to_string(cfg.estimator.kind);
        pt.report.seed = base;
        pt.l1_corrected = std::max(pt.report.l1 - study.bias_floor, kReplicateFloor);

        // bootstrap over realizations
        std::vector<ParticleState> kept;
        for (int m = 0; m < ens.realizations(); ++m)
            if (!ens.rejected[static_cast<std::size_t>(m)]) kept.push_back(ens.snapshots[0][static_cast<std::size_t>(m)]);
        RngStream rng(CounterRng(derive_seed(base, 0xb007ULL)), 0);
        std::vector<ParticleState> resample(kept.size());
        for (int b = 0; b < cfg.bootstrap; ++b) {
            for (auto& s : resample) s = kept[std::min(kept.size() - 1, static_cast<std::size_t>(rng.uniform() * kept.size()))];
            const auto rep = estimate_marginal(std::span<const ParticleState>(resample), 1, cfg.estimator);
            pt.replicates.push_back(std::max(l1_distance(rep.density, study.reference) - study.bias_floor, kReplicateFloor));
        }

        const auto iid = sample_cells(study.reference, static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(ens.accepted()),
                                      derive_seed(base, 0x11dULL));
        EstimatorConfig ecfg = cfg.estimator;
        pt.iid_l1 = l1_distance(estimate_density(iid, study.reference.dim, ecfg).density, study.reference);
        pt.seconds = seconds_since(t0);
        say("N = " + std::to_string(n) + ": L1 = " + std::to_string(pt.report.l1) + ", H1 = " +
            std::to_string(pt.report.entropy) + ", iid L1 = " + std::to_string(pt.iid_l1) + " (" +
            std::to_string(pt.seconds) + " s)");
        rate_points.push_back({static_cast<double>(n), pt.l1_corrected, pt.replicates});
        study.points.push_back(std::move(pt));
    }
    study.fit = fit_rate(rate_points, 2000, cfg.seed);
    study.monotone = true;
    for (std::size_t i = 1; i < study.points.size(); ++i) {
        if (!(study.points[i].l1_corrected < study.points[i - 1].l1_corrected)) study.monotone = false;
    }
    return study;
}

} // namespace chaoslab
