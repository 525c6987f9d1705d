#include "chaoslab/fourier_field.hpp"

#include "chaoslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

namespace chaoslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_dim(int dim, const char* who)
{
    if (dim < 1 || dim > kMaxDim) {
        throw InvalidArgument(std::string(who) + ": dimension " + std::to_string(dim) + " not in {1,2}");
    }
}

double phase(const WaveVector& k, const double* x, int dim)
{
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += k[j] * x[j];
    return kTwoPi * s;
}

} // namespace

FourierVectorField::FourierVectorField(int dim, std::vector<VectorMode> modes) : dim_(dim), modes_(std::move(modes))
{
    check_dim(dim, "FourierVectorField");
    for (const auto& m : modes_) {
        for (int j = dim; j < kMaxDim; ++j) {
            if (m.k[j] != 0 || m.sin_coef[j] != 0.0 || m.cos_coef[j] != 0.0) {
                throw InvalidArgument("FourierVectorField: mode has components beyond dimension");
            }
        }
    }
}

FourierVectorField FourierVectorField::from_stream_function(const std::vector<StreamMode>& modes)
{
    std::vector<VectorMode> out;
    out.reserve(modes.size());
    for (const auto& m : modes) {
        const double k1 = kTwoPi * m.k[0];
        const double k2 = kTwoPi * m.k[1];
        VectorMode v;
        v.k = m.k;
        // grad-perp = (-d2, d1); d/dx of a cos(th) = -k a sin(th), of b sin(th) = k b cos(th)
        v.sin_coef = {k2 * m.cos_amp, -k1 * m.cos_amp};
        v.cos_coef = {-k2 * m.sin_amp, k1 * m.sin_amp};
        out.push_back(v);
    }
    return FourierVectorField(2, std::move(out));
}

Vec FourierVectorField::eval(const double* x) const
{
    Vec out{};
    for (const auto& m : modes_) {
        const double th = phase(m.k, x, dim_);
        const double s = std::sin(th);
        const double c = std::cos(th);
        for (int j = 0; j < dim_; ++j) out[j] += m.sin_coef[j] * s + m.cos_coef[j] * c;
    }
    return out;
}

bool FourierVectorField::is_odd() const
{
    return std::all_of(modes_.begin(), modes_.end(), [this](const VectorMode& m) {
        for (int j = 0; j < dim_; ++j)
            if (m.cos_coef[j] != 0.0) return false;
        return true;
    });
}

bool FourierVectorField::is_divergence_free() const
{
    for (const auto& m : modes_) {
        double ds = 0.0, dc = 0.0, scale = 0.0;
        for (int j = 0; j < dim_; ++j) {
            ds += m.k[j] * m.sin_coef[j];
            dc += m.k[j] * m.cos_coef[j];
            scale += std::abs(m.k[j]) * (std::abs(m.sin_coef[j]) + std::abs(m.cos_coef[j]));
        }
        if (std::abs(ds) > 1e-14 * scale || std::abs(dc) > 1e-14 * scale) return false;
    }
    return true;
}

int FourierVectorField::max_wavenumber() const
{
    int kmax = 0;
    for (const auto& m : modes_)
        for (int j = 0; j < dim_; ++j) kmax = std::max(kmax, std::abs(m.k[j]));
    return kmax;
}

double FourierVectorField::sup_norm(int n) const
{
    double best = 0.0;
    double x[kMaxDim] = {0.0, 0.0};
    const int n2 = dim_ == 2 ? n : 1;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n2; ++j) {
            x[0] = static_cast<double>(i) / n;
            x[1] = static_cast<double>(j) / n;
            const Vec v = eval(x);
            double s = 0.0;
            for (int c = 0; c < dim_; ++c) s += v[c] * v[c];
            best = std::max(best, std::sqrt(s));
        }
    }
    return best;
}

FourierVectorField FourierVectorField::scaled(double factor) const
{
    auto modes = modes_;
    for (auto& m : modes) {
        for (int j = 0; j < kMaxDim; ++j) {
            m.sin_coef[j] *= factor;
            m.cos_coef[j] *= factor;
        }
    }
    return FourierVectorField(dim_, std::move(modes));
}

FourierDensity::FourierDensity(int dim, std::vector<ScalarMode> modes) : dim_(dim), modes_(std::move(modes))
{
    check_dim(dim, "FourierDensity");
    for (const auto& m : modes_) {
        bool zero = true;
        for (int j = 0; j < kMaxDim; ++j) {
            if (j >= dim && m.k[j] != 0) throw InvalidArgument("FourierDensity: mode beyond dimension");
            zero = zero && m.k[j] == 0;
        }
        if (zero) throw InvalidArgument("FourierDensity: the constant mode is fixed to 1 (unit mass)");
    }
    if (lower_bound() < 0.0) {
        throw InvalidArgument("FourierDensity: amplitudes too large, density may become negative");
    }
}

FourierDensity FourierDensity::uniform(int dim) { return FourierDensity(dim, {}); }

FourierDensity FourierDensity::taylor_green(double amplitude)
{
    // sin(a) sin(b) = (cos(a-b) - cos(a+b)) / 2
    return FourierDensity(2, {ScalarMode{{1, -1}, amplitude / 2.0, 0.0}, ScalarMode{{1, 1}, -amplitude / 2.0, 0.0}});
}

FourierDensity FourierDensity::random_band_limited(int dim, int kmax, std::uint64_t seed, double min_density)
{
    check_dim(dim, "random_band_limited");
    if (kmax < 1 || min_density < 0.0 || min_density >= 1.0) {
        throw InvalidArgument("random_band_limited: need kmax >= 1 and 0 <= min_density < 1");
    }
    RngStream rng(CounterRng(seed), 0x1d);
    std::vector<ScalarMode> modes;
    const int k2max = dim == 2 ? kmax : 0;
    for (int k1 = 0; k1 <= kmax; ++k1) {
        for (int k2 = -k2max; k2 <= k2max; ++k2) {
            // one representative per +-k pair
            if (k1 == 0 && k2 <= 0) continue;
            ScalarMode m;
            m.k = {k1, k2};
            m.cos_amp = rng.normal();
            m.sin_amp = rng.normal();
            modes.push_back(m);
        }
    }
    double total = 0.0;
    for (const auto& m : modes) total += std::abs(m.cos_amp) + std::abs(m.sin_amp);
    const double scale = total > 0.0 ? (1.0 - min_density) / total : 0.0;
    for (auto& m : modes) {
        m.cos_amp *= scale;
        m.sin_amp *= scale;
    }
    return FourierDensity(dim, std::move(modes));
}

double FourierDensity::eval(const double* x) const
{
    double v = 1.0;
    for (const auto& m : modes_) {
        const double th = phase(m.k, x, dim_);
        v += m.cos_amp * std::cos(th) + m.sin_amp * std::sin(th);
    }
    return v;
}

double FourierDensity::upper_bound() const
{
    double s = 1.0;
    for (const auto& m : modes_) s += std::abs(m.cos_amp) + std::abs(m.sin_amp);
    return s;
}

double FourierDensity::lower_bound() const { return 2.0 - upper_bound(); }

double FourierDensity::box_average(const double* lo, const double* hi) const
{
    double v = 1.0;
    for (const auto& m : modes_) {
        // average of exp(2 pi i k.x) over the box factorizes per coordinate
        double re = 1.0, im = 0.0;
        for (int j = 0; j < dim_; ++j) {
            const double w = hi[j] - lo[j];
            double fr = 0.0, fi = 0.0;
            if (m.k[j] == 0) {
                fr = 1.0;
            } else {
                const double a = kTwoPi * m.k[j];
                // (exp(i a hi) - exp(i a lo)) / (i a w)
                fr = (std::sin(a * hi[j]) - std::sin(a * lo[j])) / (a * w);
                fi = -(std::cos(a * hi[j]) - std::cos(a * lo[j])) / (a * w);
            }
            const double nr = re * fr - im * fi;
            const double ni = re * fi + im * fr;
            re = nr;
            im = ni;
        }
        // cos = Re, sin = Im
        v += m.cos_amp * re + m.sin_amp * im;
    }
    return v;
}

int FourierDensity::max_wavenumber() const
{
    int kmax = 0;
    for (const auto& m : modes_)
        for (int j = 0; j < dim_; ++j) kmax = std::max(kmax, std::abs(m.k[j]));
    return kmax;
}

TorusPoint FourierDensity::sample(RngStream& rng) const
{
    const double bound = upper_bound();
    TorusPoint p;
    p.dim = dim_;
    for (;;) {
        for (int j = 0; j < dim_; ++j) p.coords[j] = rng.uniform();
        if (modes_.empty()) return p;
        if (rng.uniform() * bound <= eval(p.coords.data())) return p;
    }
}

} // namespace chaoslab
