#include "chaoslab/spectral.hpp"

#include "chaoslab/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace chaoslab {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace

Fft::Fft(int n, int dim) : n_(n), dim_(dim)
{
    if (n < 2 || (n & (n - 1)) != 0) throw InvalidArgument("Fft: grid size must be a power of two >= 2");
    if (dim < 1 || dim > 4) throw InvalidArgument("Fft: dimension must be in [1,4]");
    real_size_ = 1;
    for (int j = 0; j < dim; ++j) real_size_ *= static_cast<std::size_t>(n);
    spectral_size_ = real_size_ / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);

    std::vector<int> dims(static_cast<std::size_t>(dim), n);
    std::vector<double> r(real_size_);
    std::vector<Complex> c(spectral_size_);
    std::lock_guard lock(planner_mutex());
    plan_forward_ = fftw_plan_dft_r2c(dim, dims.data(), r.data(), reinterpret_cast<fftw_complex*>(c.data()),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_inverse_ = fftw_plan_dft_c2r(dim, dims.data(), reinterpret_cast<fftw_complex*>(c.data()), r.data(),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_forward_ == nullptr || plan_inverse_ == nullptr) throw Error("Fft: FFTW planning failed");
}

Fft::~Fft()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inverse_));
}

void Fft::forward(std::span<const double> in, std::span<Complex> out) const
{
    if (in.size() != real_size_ || out.size() != spectral_size_) throw InvalidArgument("Fft::forward: size mismatch");
    // FFTW r2c does not modify its input
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_forward_), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / static_cast<double>(real_size_);
    for (auto& z : out) z *= scale;
}

void Fft::inverse(std::span<const Complex> in, std::span<double> out) const
{
    if (out.size() != real_size_ || in.size() != spectral_size_) throw InvalidArgument("Fft::inverse: size mismatch");
    // c2r destroys its input
    std::vector<Complex> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inverse_), reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.data());
}

std::vector<Complex> Fft::forward(std::span<const double> in) const
{
    std::vector<Complex> out(spectral_size_);
    forward(in, out);
    return out;
}

std::vector<double> Fft::inverse(std::span<const Complex> in) const
{
    std::vector<double> out(real_size_);
    inverse(in, out);
    return out;
}

void Fft::wavevector(std::size_t index, int* k) const
{
    const std::size_t last = static_cast<std::size_t>(n_ / 2 + 1);
    k[dim_ - 1] = static_cast<int>(index % last);
    index /= last;
    for (int j = dim_ - 2; j >= 0; --j) {
        const int i = static_cast<int>(index % static_cast<std::size_t>(n_));
        index /= static_cast<std::size_t>(n_);
        k[j] = i <= n_ / 2 ? i : i - n_;
    }
}

bool Fft::is_nyquist(const int* k) const
{
    for (int j = 0; j < dim_; ++j)
        if (std::abs(k[j]) == n_ / 2) return true;
    return false;
}

std::shared_ptr<const Fft> Fft::get(int n, int dim)
{
    static std::mutex m;
    static std::map<std::pair<int, int>, std::shared_ptr<const Fft>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[{n, dim}];
    if (!slot) slot = std::make_shared<const Fft>(n, dim);
    return slot;
}

double spectral_divergence_relative(const GridField& v)
{
    if (v.components != v.dim) throw InvalidArgument("spectral_divergence: field must have dim components");
    const auto fft = Fft::get(v.n, v.dim);
    std::vector<Complex> div(fft->spectral_size(), Complex{});
    int k[4] = {0, 0, 0, 0};
    double vmax = 0.0;
    for (int c = 0; c < v.components; ++c) {
        const auto spec = fft->forward(v.component(c));
        for (std::size_t idx = 0; idx < spec.size(); ++idx) {
            fft->wavevector(idx, k);
            if (fft->is_nyquist(k)) continue;
            div[idx] += Complex(0.0, 2.0 * std::numbers::pi * k[c]) * spec[idx];
        }
        for (double x : v.component(c)) vmax = std::max(vmax, std::abs(x));
    }
    const auto d = fft->inverse(div);
    double dmax = 0.0;
    for (double x : d) dmax = std::max(dmax, std::abs(x));
    return vmax > 0.0 ? dmax / vmax : dmax;
}

GridField cell_average(const GridField& field)
{
    const auto fft = Fft::get(field.n, field.dim);
    GridField out = field;
    int k[4] = {0, 0, 0, 0};
    for (int c = 0; c < field.components; ++c) {
        auto spec = fft->forward(field.component(c));
        for (std::size_t idx = 0; idx < spec.size(); ++idx) {
            fft->wavevector(idx, k);
            if (fft->is_nyquist(k)) {
                spec[idx] = 0.0;
                continue;
            }
            Complex factor = 1.0;
            for (int j = 0; j < field.dim; ++j) {
                if (k[j] == 0) continue;
                const double a = std::numbers::pi * k[j] / field.n;
                // mean of exp(2 pi i k x) over [x_i, x_i + h] = exp(i a) sin(a)/a relative to node x_i
                factor *= std::polar(std::sin(a) / a, a);
            }
            spec[idx] *= factor;
        }
        fft->inverse(spec, out.component(c));
    }
    return out;
}

GridField coarsen(const GridField& fine, int factor)
{
    if (factor < 1 || fine.n % factor != 0) throw InvalidArgument("coarsen: n not divisible by factor");
    if (factor == 1) return fine;
    GridField out(fine.n / factor, fine.dim, fine.kind, fine.components);
    out.time = fine.time;
    const double inv = 1.0 / std::pow(static_cast<double>(factor), fine.dim);
    std::vector<int> idx(static_cast<std::size_t>(fine.dim));
    for (int c = 0; c < fine.components; ++c) {
        auto src = fine.component(c);
        auto dst = out.component(c);
        for (std::size_t i = 0; i < src.size(); ++i) {
            std::size_t rem = i;
            std::size_t coarse = 0;
            for (int j = fine.dim - 1; j >= 0; --j) {
                idx[static_cast<std::size_t>(j)] = static_cast<int>(rem % static_cast<std::size_t>(fine.n));
                rem /= static_cast<std::size_t>(fine.n);
            }
            for (int j = 0; j < fine.dim; ++j) {
                coarse = coarse * static_cast<std::size_t>(out.n) +
                         static_cast<std::size_t>(idx[static_cast<std::size_t>(j)] / factor);
            }
            dst[coarse] += src[i] * inv;
        }
    }
    return out;
}

GridField spectral_resample(const GridField& field, int m)
{
    const auto src_fft = Fft::get(field.n, field.dim);
    const auto dst_fft = Fft::get(m, field.dim);
    GridField out(m, field.dim, field.kind, field.components);
    out.time = field.time;
    const int kcut = std::min(field.n, m) / 2;
    int k[4] = {0, 0, 0, 0};
    for (int c = 0; c < field.components; ++c) {
        const auto spec = src_fft->forward(field.component(c));
        std::vector<Complex> dst(dst_fft->spectral_size(), Complex{});
        for (std::size_t idx = 0; idx < spec.size(); ++idx) {
            src_fft->wavevector(idx, k);
            bool keep = true;
            std::size_t di = 0;
            for (int j = 0; j < field.dim; ++j) {
                if (std::abs(k[j]) >= kcut) keep = false;
                const int wrapped = j == field.dim - 1 ? k[j] : (k[j] < 0 ? k[j] + m : k[j]);
                const std::size_t extent = j == field.dim - 1 ? static_cast<std::size_t>(m / 2 + 1)
                                                              : static_cast<std::size_t>(m);
                di = di * extent + static_cast<std::size_t>(wrapped);
            }
            if (keep) dst[di] = spec[idx];
        }
        dst_fft->inverse(dst, out.component(c));
    }
    return out;
}

} // namespace chaoslab
