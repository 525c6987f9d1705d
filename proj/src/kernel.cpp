#include "chaoslab/kernel.hpp"

#include "chaoslab/error.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace chaoslab {

std::string to_string(KernelKind kind)
{
    switch (kind) {
    case KernelKind::Zero: return "zero";
    case KernelKind::BiotSavart: return "biot_savart";
    case KernelKind::SmoothFourier: return "smooth_fourier";
    }
    return "zero";
}

Kernel Kernel::zero(int dim)
{
    if (dim < 1 || dim > kMaxDim) throw InvalidArgument("Kernel::zero: dimension must be 1 or 2");
    Kernel k;
    k.kind_ = KernelKind::Zero;
    k.dim_ = dim;
    return k;
}

Kernel Kernel::biot_savart(double alpha, double delta, int table_size,
                           const std::optional<std::filesystem::path>& cache_dir)
{
    if (!std::isfinite(alpha) || !std::isfinite(delta) || delta < 0.0) {
        throw InvalidArgument("Kernel::biot_savart: alpha must be finite and delta >= 0");
    }
    // tables are shared between kernels with the same (alpha, grid)
    static std::mutex m;
    static std::map<std::tuple<double, int>, std::weak_ptr<const BiotSavartTable>> live;
    std::shared_ptr<const BiotSavartTable> table;
    {
        std::lock_guard lock(m);
        auto& slot = live[{alpha, table_size}];
        table = slot.lock();
        if (!table) {
            table = std::make_shared<const BiotSavartTable>(BiotSavartTable::cached(alpha, table_size, cache_dir));
            slot = table;
        }
    }
    Kernel k;
    k.kind_ = KernelKind::BiotSavart;
    k.dim_ = 2;
    k.alpha_ = alpha;
    k.delta_ = delta;
    k.delta2_ = delta * delta;
    k.table_ = std::move(table);
    return k;
}

Kernel Kernel::smooth_fourier(FourierVectorField field)
{
    Kernel k;
    k.kind_ = KernelKind::SmoothFourier;
    k.dim_ = field.dim();
    k.antisymmetric_ = field.is_odd();
    k.divergence_free_ = field.is_divergence_free();
    k.fourier_ = std::move(field);
    return k;
}

Vec Kernel::eval(const Displacement& r) const
{
    if (r.dim != dim_) throw InvalidArgument("Kernel::eval: displacement dimension mismatch");
    return eval(r.components.data());
}

std::array<Complex, kMaxDim> Kernel::multiplier(const int* k) const
{
    std::array<Complex, kMaxDim> out{};
    switch (kind_) {
    case KernelKind::Zero: break;
    case KernelKind::BiotSavart: {
        const double kk = static_cast<double>(k[0] * k[0] + k[1] * k[1]);
        if (kk == 0.0) break;
        // 2 pi alpha grad-perp Delta^{-1}: (i k2, -i k1) alpha / |k|^2
        out[0] = Complex(0.0, alpha_ * k[1] / kk);
        out[1] = Complex(0.0, -alpha_ * k[0] / kk);
        break;
    }
    case KernelKind::SmoothFourier: {
        for (const auto& m : fourier_.modes()) {
            int sign = 0;
            bool plus = true, minus = true;
            for (int j = 0; j < dim_; ++j) {
                plus = plus && m.k[j] == k[j];
                minus = minus && m.k[j] == -k[j];
            }
            if (plus) sign = 1;
            else if (minus) sign = -1;
            if (sign == 0) continue;
            bool zero_mode = true;
            for (int j = 0; j < dim_; ++j) zero_mode = zero_mode && k[j] == 0;
            for (int j = 0; j < dim_; ++j) {
                if (zero_mode) {
                    out[j] += m.cos_coef[j];
                } else {
                    // sin = (e - e*)/2i, cos = (e + e*)/2
                    out[j] += Complex(0.0, -0.5 * sign * m.sin_coef[j]) + 0.5 * m.cos_coef[j];
                }
            }
        }
        break;
    }
    }
    return out;
}

GridField convolve(const Kernel& kernel, const GridField& rho)
{
    if (rho.dim != kernel.dim() || rho.components != 1) {
        throw InvalidArgument("convolve: grid dimension does not match kernel dimension");
    }
    if (kernel.kind() == KernelKind::SmoothFourier && 2 * kernel.fourier().max_wavenumber() >= rho.n) {
        throw InvalidArgument("convolve: grid does not resolve the kernel's Fourier modes");
    }
    const auto fft = Fft::get(rho.n, rho.dim);
    const auto spec = fft->forward(rho.component(0));
    GridField out(rho.n, rho.dim, FieldKind::Vector, rho.dim);
    out.time = rho.time;
    std::vector<Complex> comp(fft->spectral_size());
    int k[4] = {0, 0, 0, 0};
    for (int c = 0; c < rho.dim; ++c) {
        for (std::size_t idx = 0; idx < spec.size(); ++idx) {
            fft->wavevector(idx, k);
            if (fft->is_nyquist(k)) {
                comp[idx] = 0.0;
                continue;
            }
            comp[idx] = kernel.multiplier(k)[c] * spec[idx];
        }
        fft->inverse(comp, out.component(c));
    }
    return out;
}

} // namespace chaoslab
