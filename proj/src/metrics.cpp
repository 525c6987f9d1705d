#include "chaoslab/metrics.hpp"

#include "chaoslab/error.hpp"
#include "chaoslab/rng.hpp"
#include "chaoslab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chaoslab {

namespace {

std::size_t cell_index(const double* x, int dim, int bins)
{
    std::size_t idx = 0;
    for (int j = 0; j < dim; ++j) {
        int b = static_cast<int>(x[j] * bins);
        b = std::clamp(b, 0, bins - 1);
        idx = idx * static_cast<std::size_t>(bins) + static_cast<std::size_t>(b);
    }
    return idx;
}

void check_config(const EstimatorConfig& cfg, int dim)
{
    if (cfg.bins < 1) throw InvalidArgument("estimator: bins must be >= 1");
    if (dim < 1 || dim > 4) throw InvalidArgument("estimator: grid dimension must be in [1,4]");
    if (cfg.kind == EstimatorKind::Kde && (cfg.bins & (cfg.bins - 1)) != 0) {
        throw InvalidArgument("estimator: KDE needs a power-of-two bin count");
    }
    if (cfg.bandwidth < 0.0) throw InvalidArgument("estimator: bandwidth must be >= 0");
}

std::vector<double> silverman(std::span<const double> pts, int dim, std::size_t count)
{
    std::vector<double> h(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double v = pts[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)];
            s += v;
            s2 += v * v;
        }
        const double mean = s / static_cast<double>(count);
        const double var = std::max(0.0, s2 / static_cast<double>(count) - mean * mean);
        h[static_cast<std::size_t>(j)] = 1.06 * std::sqrt(var) * std::pow(static_cast<double>(count), -1.0 / (dim + 4));
    }
    return h;
}

/// Wrapped-Gaussian smoothing of a cell histogram through its Fourier coefficients.
void smooth(GridField& f, const std::vector<double>& h)
{
    const auto fft = Fft::get(f.n, f.dim);
    auto spec = fft->forward(f.component(0));
    int k[4] = {0, 0, 0, 0};
    const double c = 2.0 * std::numbers::pi * std::numbers::pi;
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        fft->wavevector(idx, k);
        double e = 0.0;
        for (int j = 0; j < f.dim; ++j) e += h[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)] * k[j] * k[j];
        spec[idx] *= std::exp(-c * e);
    }
    fft->inverse(spec, f.component(0));
    double total = 0.0;
    for (double& v : f.values) {
        v = std::max(v, 0.0);
        total += v;
    }
    const double scale = static_cast<double>(f.size()) / total;
    for (double& v : f.values) v *= scale;
}

MarginalEstimate finish(std::vector<double> counts, std::size_t total, int dim, const EstimatorConfig& cfg,
                        std::span<const double> pts)
{
    if (total == 0) throw InvalidArgument("estimate_marginal: no samples");
    MarginalEstimate est;
    est.estimator = cfg.kind;
    est.sample_count = total;
    est.bin_width = 1.0 / cfg.bins;
    est.density = GridField(cfg.bins, dim, FieldKind::Density);
    const double scale = static_cast<double>(est.density.size()) / static_cast<double>(total);
    for (std::size_t i = 0; i < counts.size(); ++i) est.density.values[i] = counts[i] * scale;
    if (cfg.kind == EstimatorKind::Kde) {
        est.bandwidth = cfg.bandwidth > 0.0 ? std::vector<double>(static_cast<std::size_t>(dim), cfg.bandwidth)
                                            : silverman(pts, dim, total);
        smooth(est.density, est.bandwidth);
    }
    return est;
}

std::size_t grid_cells(int bins, int dim)
{
    std::size_t n = 1;
    for (int j = 0; j < dim; ++j) n *= static_cast<std::size_t>(bins);
    return n;
}

} // namespace

std::string to_string(EstimatorKind kind) { return kind == EstimatorKind::Histogram ? "histogram" : "kde"; }

EstimatorKind estimator_kind_from_string(const std::string& name)
{
    if (name == "histogram") return EstimatorKind::Histogram;
    if (name == "kde") return EstimatorKind::Kde;
    throw InvalidArgument("unknown estimator '" + name + "' (expected histogram or kde)");
}

MarginalEstimate estimate_density(std::span<const double> points, int dim, const EstimatorConfig& cfg)
{
    check_config(cfg, dim);
    if (points.size() % static_cast<std::size_t>(dim) != 0) throw InvalidArgument("estimate_density: ragged input");
    const std::size_t count = points.size() / static_cast<std::size_t>(dim);
    std::vector<double> counts(grid_cells(cfg.bins, dim), 0.0);
    for (std::size_t i = 0; i < count; ++i) counts[cell_index(&points[i * static_cast<std::size_t>(dim)], dim, cfg.bins)] += 1.0;
    return finish(std::move(counts), count, dim, cfg, points);
}

MarginalEstimate estimate_marginal(std::span<const ParticleState> samples, int k, const EstimatorConfig& cfg)
{
    if (samples.empty()) throw InvalidArgument("estimate_marginal: empty ensemble");
    if (k != 1 && k != 2) throw InvalidArgument("estimate_marginal: k must be 1 or 2");
    const int d = samples.front().dim;
    const int n = samples.front().count;
    for (const auto& s : samples) {
        if (s.dim != d || s.count != n) throw InvalidArgument("estimate_marginal: members differ in N or d");
    }
    if (k > n) throw InvalidArgument("estimate_marginal: k exceeds N");
    const int dim = k * d;
    check_config(cfg, dim);
    std::vector<double> counts(grid_cells(cfg.bins, dim), 0.0);
    std::vector<double> pts;
    const bool keep_points = cfg.kind == EstimatorKind::Kde && cfg.bandwidth == 0.0;
    std::size_t total = 0;
    double buf[4] = {0, 0, 0, 0};

    auto add = [&](const double* x) {
        counts[cell_index(x, dim, cfg.bins)] += 1.0;
        if (keep_points) pts.insert(pts.end(), x, x + dim);
        ++total;
    };

    if (k == 1) {
        for (const auto& s : samples)
            for (int i = 0; i < n; ++i) add(s.position(i));
    } else {
        const std::size_t per_member = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1);
        const std::size_t share = std::max<std::size_t>(1, cfg.pair_budget / samples.size());
        for (std::size_t m = 0; m < samples.size(); ++m) {
            const auto& s = samples[m];
            auto put = [&](int i, int j) {
                std::copy(s.position(i), s.position(i) + d, buf);
                std::copy(s.position(j), s.position(j) + d, buf + d);
                add(buf);
            };
            if (per_member <= share) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        if (i != j) put(i, j);
            } else {
                RngStream rng(CounterRng(derive_seed(cfg.seed, m)), 2);
                for (std::size_t q = 0; q < share; ++q) {
                    const int i = std::min(n - 1, static_cast<int>(rng.uniform() * n));
                    int j = std::min(n - 2, static_cast<int>(rng.uniform() * (n - 1)));
                    if (j >= i) ++j;
                    put(i, j);
                }
            }
        }
    }
    auto est = finish(std::move(counts), total, dim, cfg, pts);
    est.k = k;
    return est;
}

MarginalEstimate estimate_marginal(const Ensemble& ens, std::size_t t, int k, const EstimatorConfig& cfg)
{
    if (t >= ens.snapshots.size()) throw InvalidArgument("estimate_marginal: time index out of range");
    std::vector<ParticleState> kept;
    for (std::size_t m = 0; m < ens.snapshots[t].size(); ++m) {
        if (!ens.rejected[m]) kept.push_back(ens.snapshots[t][m]);
    }
    if (kept.empty()) throw InvalidArgument("estimate_marginal: every realization was rejected");
    auto est = estimate_marginal(std::span<const ParticleState>(kept), k, cfg);
    est.density.time = ens.times[t];
    return est;
}

GridField tensor_square(const GridField& f)
{
    if (f.components != 1 || 2 * f.dim > 4) throw InvalidArgument("tensor_square: need a scalar field with dim <= 2");
    GridField out(f.n, 2 * f.dim, f.kind);
    out.time = f.time;
    const std::size_t m = f.size();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) out.values[a * m + b] = f.values[a] * f.values[b];
    return out;
}

double relative_entropy(const GridField& p, const GridField& q, int k, double floor)
{
    require_same_grid(p, q, "relative_entropy");
    if (k < 1) throw InvalidArgument("relative_entropy: k must be >= 1");
    double h = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double pi = p.values[i];
        if (pi <= 0.0) continue;
        const double qi = q.values[i];
        if (qi < floor) {
            throw InvalidArgument("relative_entropy: reference density below floor where p > 0 (cell " +
                                  std::to_string(i) + ")");
        }
        h += pi * std::log(pi / std::max(qi, floor));
    }
    return h * p.cell_volume() / k;
}

double l1_distance(const GridField& p, const GridField& q)
{
    require_same_grid(p, q, "l1_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) s += std::abs(p.values[i] - q.values[i]);
    return s * p.cell_volume();
}

EntropyReport entropy_report(const GridField& p, const GridField& q, int k)
{
    EntropyReport r;
    r.k = k;
    r.entropy = relative_entropy(p, q, k);
    r.l1 = l1_distance(p, q);
    r.ckp_rhs = std::sqrt(2.0 * k * std::max(r.entropy, 0.0));
    r.time = p.time;
    r.bins = p.n;
    return r;
}

bool ckp_check(const EntropyReport& r) { return r.l1 <= std::sqrt(2.0 * r.k * std::max(r.entropy, 0.0)) + 1e-10; }

std::pair<double, double> least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least_squares: need >= 2 matching points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidArgument("least_squares: abscissae are all equal");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

RateFit fit_rate(const std::vector<RatePoint>& points, int bootstrap, std::uint64_t seed)
{
    if (points.size() < 3) throw InvalidArgument("fit_rate: need at least 3 points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].error > 0.0) || !std::isfinite(points[i].error)) {
            throw InvalidArgument("fit_rate: errors must be positive and finite");
        }
        if (!(points[i].n > 0.0)) throw InvalidArgument("fit_rate: N must be positive");
        if (i > 0 && !(points[i].n > points[i - 1].n)) throw InvalidArgument("fit_rate: N must be strictly increasing");
        for (double r : points[i].replicates) {
            if (!(r > 0.0)) throw InvalidArgument("fit_rate: replicate errors must be positive");
        }
    }
    std::vector<double> x, y;
    for (const auto& p : points) {
        x.push_back(std::log(p.n));
        y.push_back(std::log(p.error));
    }
    RateFit fit;
    std::tie(fit.slope, fit.intercept) = least_squares(x, y);
    fit.points = points;
    fit.ci_low = fit.ci_high = fit.slope;
    if (bootstrap <= 0) return fit;

    std::vector<double> resid(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) resid[i] = y[i] - (fit.intercept + fit.slope * x[i]);
    RngStream rng(CounterRng(seed), 3);
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(bootstrap));
    std::vector<double> yb(x.size());
    for (int b = 0; b < bootstrap; ++b) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto& reps = points[i].replicates;
            if (!reps.empty()) {
                const auto pick = std::min(reps.size() - 1, static_cast<std::size_t>(rng.uniform() * reps.size()));
                yb[i] = std::log(reps[pick]);
            } else {
                const auto pick = std::min(resid.size() - 1, static_cast<std::size_t>(rng.uniform() * resid.size()));
                yb[i] = fit.intercept + fit.slope * x[i] + resid[pick];
            }
        }
        slopes.push_back(least_squares(x, yb).first);
    }
    std::sort(slopes.begin(), slopes.end());
    const auto at = [&](double q) {
        const double pos = q * static_cast<double>(slopes.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const auto hi = std::min(lo + 1, slopes.size() - 1);
        return slopes[lo] + (pos - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
    };
    fit.ci_low = at(0.025);
    fit.ci_high = at(0.975);
    fit.bootstrap_samples = bootstrap;
    return fit;
}

} // namespace chaoslab
