#include "chaoslab/partition.hpp"

#include "chaoslab/error.hpp"
#include "chaoslab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace chaoslab {

namespace {

constexpr double kMaxExponent = 700.0;

void require_flags(const TestFunctionPair& tf, PartitionVariant v)
{
    tf.check_flags();
    if (!tf.z_cancel) throw InvalidArgument("partition_function: z-side cancellation required but not declared");
    if (v == PartitionVariant::DoubleSum && !tf.x_cancel) {
        throw InvalidArgument("partition_function: x-side cancellation required but not declared");
    }
}

double golden_max(const TestFunctionPair& tf, double x, double lo, double hi)
{
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double z) { return std::abs(tf.eval(x, z)); };
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    for (int it = 0; it < 60; ++it) {
        if (f(c) > f(d)) b = d;
        else a = c;
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return std::max({f(a), f(b), f(0.5 * (a + b))});
}

/// sup_z |phi(x, z)| for a fixed x
double sup_z(const TestFunctionPair& tf, double x, int nodes)
{
    int best = 0;
    double val = -1.0;
    for (int j = 0; j < nodes; ++j) {
        const double v = std::abs(tf.eval(x, static_cast<double>(j) / nodes));
        if (v > val) {
            val = v;
            best = j;
        }
    }
    const double h = 1.0 / nodes;
    return std::max(val, golden_max(tf, x, (best - 1) * h, (best + 1) * h));
}

} // namespace

double squared_sum_bound(double psi_inf)
{
    if (!(psi_inf >= 0.0) || !std::isfinite(psi_inf)) throw InvalidArgument("squared_sum_bound: need a finite norm >= 0");
    const double e = std::numbers::e;
    if (psi_inf >= 1.0 / (2.0 * e)) throw OutOfHypothesis("squared_sum_bound: ||psi||_inf must be < 1/(2e)");
    const double a = std::pow(e * psi_inf, 4);
    const double b = std::pow(std::sqrt(2.0 * e) * psi_inf, 4);
    return 2.0 * (1.0 + 10.0 * a / std::pow(1.0 - a, 3) + b / (1.0 - b));
}

double double_sum_gamma(double growth, double constant)
{
    if (!(growth >= 0.0) || !(constant > 0.0)) throw InvalidArgument("double_sum_gamma: need growth >= 0 and C > 0");
    return constant * growth * growth;
}

double double_sum_bound(double gamma)
{
    if (!(gamma >= 0.0)) throw InvalidArgument("double_sum_bound: gamma must be >= 0");
    if (gamma >= 1.0) throw OutOfHypothesis("double_sum_bound: gamma = " + std::to_string(gamma) + " is not < 1");
    return 2.0 / (1.0 - gamma);
}

double sup_norm(const TestFunctionPair& tf, int nodes)
{
    double best = 0.0;
    int bi = 0;
    for (int i = 0; i < nodes; ++i) {
        const double v = sup_z(tf, static_cast<double>(i) / nodes, nodes);
        if (v > best) {
            best = v;
            bi = i;
        }
    }
    // refine in x around the best node
    const double h = 1.0 / nodes;
    for (int s = -8; s <= 8; ++s) best = std::max(best, sup_z(tf, (bi + s / 8.0) * h, nodes));
    return best;
}

GrowthNorm growth_norm(const TestFunctionPair& tf, int p_max, int nodes)
{
    if (p_max < 1) throw InvalidArgument("growth_norm: p_max must be >= 1");
    if (tf.rho_bar.dim() != 1) throw InvalidArgument("growth_norm: rho_bar must be one-dimensional");
    std::vector<double> s(static_cast<std::size_t>(nodes)), w(static_cast<std::size_t>(nodes));
    GrowthNorm g;
    for (int i = 0; i < nodes; ++i) {
        const double x = static_cast<double>(i) / nodes;
        s[static_cast<std::size_t>(i)] = sup_z(tf, x, 256);
        w[static_cast<std::size_t>(i)] = tf.rho_bar.eval(&x) / nodes;
        g.sup = std::max(g.sup, s[static_cast<std::size_t>(i)]);
    }
    double prev = -1.0;
    int decreases = 0;
    for (int p = 1; p <= p_max; ++p) {
        double acc = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            // scale by the sup to keep s^p representable
            if (g.sup > 0.0) acc += w[i] * std::pow(s[i] / g.sup, p);
        }
        const double ratio = g.sup * std::pow(acc, 1.0 / p) / p;
        ++g.evaluated;
        if (ratio > g.value) {
            g.value = ratio;
            g.best_p = p;
        }
        decreases = ratio < prev ? decreases + 1 : 0;
        prev = ratio;
        if (decreases >= 8) {
            g.stopped_early = p < p_max;
            break;
        }
    }
    return g;
}

std::string to_string(PartitionVariant v) { return v == PartitionVariant::SquaredSum ? "squared-sum" : "double-sum"; }
std::string to_string(PartitionMode m) { return m == PartitionMode::Quadrature ? "quadrature" : "monte-carlo"; }

double partition_quadrature(const TestFunctionPair& tf, int N, PartitionVariant variant, int nodes)
{
    if (N < 1 || N > 4) throw InvalidArgument("partition_quadrature: tensor quadrature needs 1 <= N <= 4");
    if (nodes < 4 || nodes > 256) throw InvalidArgument("partition_quadrature: nodes must be in [4, 256]");
    const auto n = static_cast<std::size_t>(nodes);
    std::vector<double> table(n * n), w(n);
    for (std::size_t a = 0; a < n; ++a) {
        const double x = static_cast<double>(a) / nodes;
        w[a] = tf.rho_bar.eval(&x) / nodes;
        for (std::size_t b = 0; b < n; ++b) table[a * n + b] = tf.eval(x, static_cast<double>(b) / nodes);
    }
    std::size_t total = 1;
    for (int i = 0; i < N; ++i) total *= n;
    double max_exp = -1e300;
    double sum = 0.0;
    std::vector<std::size_t> t(static_cast<std::size_t>(N));
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double weight = 1.0;
        for (int i = N - 1; i >= 0; --i) {
            t[static_cast<std::size_t>(i)] = rem % n;
            rem /= n;
            weight *= w[t[static_cast<std::size_t>(i)]];
        }
        double e = 0.0;
        if (variant == PartitionVariant::DoubleSum) {
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) e += table[t[static_cast<std::size_t>(i)] * n + t[static_cast<std::size_t>(j)]];
            e /= N;
        } else {
            double inner = 0.0;
            for (int j = 0; j < N; ++j) inner += table[t[0] * n + t[static_cast<std::size_t>(j)]];
            e = inner * inner / N;
        }
        max_exp = std::max(max_exp, e);
        sum += weight * std::exp(std::min(e, kMaxExponent));
    }
    if (max_exp > kMaxExponent) {
        throw NumericalError("partition_quadrature: exponent overflow, max exponent " + std::to_string(max_exp));
    }
    return sum;
}

MonteCarloEstimate partition_monte_carlo(const TestFunctionPair& tf, int N, PartitionVariant variant,
                                         std::uint64_t samples, std::uint64_t seed)
{
    if (N < 1) throw InvalidArgument("partition_monte_carlo: N must be >= 1");
    if (samples < 2) throw InvalidArgument("partition_monte_carlo: need at least 2 samples");
    const std::size_t R = tf.terms.size();
    std::vector<double> values(static_cast<std::size_t>(samples));
    double max_exp = -1e300;
    const CounterRng key(seed);
#pragma omp parallel
    {
        std::vector<double> fs(R), gs(R), x(static_cast<std::size_t>(N));
        double local_max = -1e300;
#pragma omp for schedule(static)
        for (std::int64_t s = 0; s < static_cast<std::int64_t>(samples); ++s) {
            RngStream rng(key, static_cast<std::uint64_t>(s));
            for (auto& xi : x) xi = tf.rho_bar.sample(rng).coords[0];
            std::fill(fs.begin(), fs.end(), 0.0);
            std::fill(gs.begin(), gs.end(), 0.0);
            for (std::size_t r = 0; r < R; ++r) {
                for (double xi : x) {
                    fs[r] += tf.terms[r].f.eval(xi);
                    gs[r] += tf.terms[r].g.eval(xi);
                }
            }
            double e = 0.0;
            if (variant == PartitionVariant::DoubleSum) {
                for (std::size_t r = 0; r < R; ++r) e += tf.terms[r].coef * fs[r] * gs[r];
                e /= N;
            } else {
                double inner = 0.0;
                for (std::size_t r = 0; r < R; ++r) inner += tf.terms[r].coef * tf.terms[r].f.eval(x[0]) * gs[r];
                e = inner * inner / N;
            }
            local_max = std::max(local_max, e);
            values[static_cast<std::size_t>(s)] = std::exp(std::min(e, kMaxExponent));
        }
#pragma omp critical
        max_exp = std::max(max_exp, local_max);
    }
    if (max_exp > kMaxExponent) {
        throw NumericalError("partition_monte_carlo: exponent overflow, max exponent " + std::to_string(max_exp));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(samples);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(samples - 1);
    return {mean, std::sqrt(var / static_cast<double>(samples)), samples};
}

BoundReport partition_function(const TestFunctionPair& tf, int N, const PartitionOptions& opt)
{
    if (N < 1) throw InvalidArgument("partition_function: N must be >= 1");
    require_flags(tf, opt.variant);
    BoundReport r;
    r.quantity = "partition-" + to_string(opt.variant);
    r.parameters = {{"test_function", tf.name}, {"N", N}, {"variant", to_string(opt.variant)}};
    if (opt.variant == PartitionVariant::SquaredSum) {
        const double s = sup_norm(tf);
        r.bound = squared_sum_bound(s);
        r.parameters["psi_inf"] = s;
    } else {
        const GrowthNorm g = growth_norm(tf);
        const double gamma = double_sum_gamma(g.value, opt.double_sum_constant);
        r.parameters["growth_norm"] = g.value;
        r.parameters["growth_best_p"] = g.best_p;
        r.parameters["growth_p_evaluated"] = g.evaluated;
        r.parameters["gamma"] = gamma;
        r.parameters["constant"] = opt.double_sum_constant;
        r.bound = double_sum_bound(gamma);
    }
    if (opt.mode == PartitionMode::Quadrature) {
        r.method = BoundMethod::Quadrature;
        r.estimate = partition_quadrature(tf, N, opt.variant, opt.nodes);
        r.parameters["nodes"] = opt.nodes;
        r.pass = r.estimate <= r.bound;
    } else {
        r.method = BoundMethod::MonteCarlo;
        const auto mc = partition_monte_carlo(tf, N, opt.variant, opt.samples, opt.seed);
        r.estimate = mc.mean;
        r.std_error = mc.std_error;
        r.parameters["samples"] = mc.samples;
        r.parameters["seed"] = opt.seed;
        r.pass = r.upper() <= r.bound;
    }
    return r;
}

CancellationResult verify_cancellation(std::span<const int> I, std::span<const int> J, const TestFunctionPair& tf,
                                       int N, int nodes)
{
    if (I.size() != J.size() || I.empty()) throw InvalidArgument("verify_cancellation: I and J need equal nonzero length");
    if (N < 1 || N > 4) throw InvalidArgument("verify_cancellation: quadrature limited to N <= 4");
    if (nodes < 4 || nodes > 256) throw InvalidArgument("verify_cancellation: nodes must be in [4, 256]");
    if (!is_reduced(I, N)) throw InvalidArgument("verify_cancellation: I is not in reduced form");
    multiplicities(J, N);
    if (!tf.x_cancel || !tf.z_cancel) throw InvalidArgument("verify_cancellation: both cancellation flags required");
    tf.check_flags();

    CancellationResult res;
    std::tie(res.m, res.n) = singleton_split(I, N);
    res.in_j_set = in_j_set(J, N, res.m, res.n);

    const std::size_t len = I.size();
    const std::size_t R = tf.terms.size();
    const auto n = static_cast<std::size_t>(nodes);
    // tabulate factors and weights on the nodes
    std::vector<double> w(n);
    std::vector<std::vector<double>> fv(R, std::vector<double>(n)), gv(R, std::vector<double>(n));
    for (std::size_t a = 0; a < n; ++a) {
        const double x = static_cast<double>(a) / nodes;
        w[a] = tf.rho_bar.eval(&x) / nodes;
        for (std::size_t r = 0; r < R; ++r) {
            fv[r][a] = tf.terms[r].f.eval(x);
            gv[r][a] = tf.terms[r].g.eval(x);
        }
    }
    std::vector<std::size_t> choice(len, 0);
    std::vector<double> prod(static_cast<std::size_t>(N) * n);
    double total = 0.0;
    while (true) {
        std::fill(prod.begin(), prod.end(), 1.0);
        double coef = 1.0;
        for (std::size_t nu = 0; nu < len; ++nu) {
            const std::size_t r = choice[nu];
            coef *= tf.terms[r].coef;
            double* pi = &prod[static_cast<std::size_t>(I[nu] - 1) * n];
            double* pj = &prod[static_cast<std::size_t>(J[nu] - 1) * n];
            for (std::size_t a = 0; a < n; ++a) pi[a] *= fv[r][a];
            for (std::size_t a = 0; a < n; ++a) pj[a] *= gv[r][a];
        }
        double term = coef;
        for (int l = 0; l < N; ++l) {
            double s = 0.0;
            for (std::size_t a = 0; a < n; ++a) s += w[a] * prod[static_cast<std::size_t>(l) * n + a];
            term *= s;
        }
        total += term;
        std::size_t pos = len;
        while (pos > 0 && choice[pos - 1] == R - 1) choice[--pos] = 0;
        if (pos == 0) break;
        ++choice[pos - 1];
    }
    res.value = total;
    res.pass = res.in_j_set || std::abs(total) < 1e-8;
    return res;
}

ChangeOfLaw change_of_law_check(std::span<const double> rho, std::span<const double> rho_bar,
                                std::span<const double> phi, double eta, int N)
{
    if (rho.size() != rho_bar.size() || rho.size() != phi.size() || rho.empty()) {
        throw InvalidArgument("change_of_law_check: size mismatch");
    }
    if (!(eta > 0.0)) throw InvalidArgument("change_of_law_check: eta must be > 0");
    if (N < 1) throw InvalidArgument("change_of_law_check: N must be >= 1");
    ChangeOfLaw out;
    double h = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] < 0.0 || rho_bar[i] < 0.0) throw InvalidArgument("change_of_law_check: negative probability");
        out.lhs += phi[i] * rho[i];
        if (rho[i] > 0.0) {
            if (rho_bar[i] == 0.0) {
                h = INFINITY;
                continue;
            }
            h += rho[i] * std::log(rho[i] / rho_bar[i]);
        }
    }
    out.entropy = h / N;
    // log-sum-exp of N eta Phi weighted by rho_bar
    double top = -INFINITY;
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho_bar[i] > 0.0) top = std::max(top, N * eta * phi[i]);
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho_bar[i] > 0.0) acc += rho_bar[i] * std::exp(N * eta * phi[i] - top);
    const double log_z = top + std::log(acc);
    out.rhs = (out.entropy + log_z / N) / eta;
    out.pass = out.lhs <= out.rhs + 1e-12;
    return out;
}

} // namespace chaoslab
