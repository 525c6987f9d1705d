#pragma once

#include "chaoslab/biot_savart.hpp"
#include "chaoslab/fourier_field.hpp"
#include "chaoslab/grid_field.hpp"
#include "chaoslab/spectral.hpp"
#include "chaoslab/torus.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace chaoslab {

enum class KernelKind { Zero, BiotSavart, SmoothFourier };

std::string to_string(KernelKind kind);

/// Interaction kernel K on the d-torus. Immutable and cheap to copy (tables are shared).
/// eval() follows the K(0) = 0 convention for every kind.
class Kernel {
public:
    static constexpr double kDefaultAlpha = 0.15915494309189535;  // 1/(2 pi)
    static constexpr int kDefaultTableSize = 256;

    static Kernel zero(int dim);
    /// Periodized Biot-Savart law alpha r_perp/(|r|^2 + delta^2) + alpha R(r) on the 2-torus.
    static Kernel biot_savart(double alpha = kDefaultAlpha, double delta = 0.0, int table_size = kDefaultTableSize,
                              const std::optional<std::filesystem::path>& cache_dir = std::nullopt);
    static Kernel smooth_fourier(FourierVectorField field);

    KernelKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double alpha() const { return alpha_; }
    double delta() const { return delta_; }
    int table_size() const { return table_ ? table_->n() : 0; }
    bool antisymmetric() const { return antisymmetric_; }
    bool divergence_free() const { return divergence_free_; }
    const FourierVectorField& fourier() const { return fourier_; }
    const BiotSavartTable* table() const { return table_.get(); }

    Vec eval(const Displacement& r) const;
    /// Fast path: r points to dim() minimal-image components.
    Vec eval(const double* r) const
    {
        switch (kind_) {
        case KernelKind::Zero: return {0.0, 0.0};
        case KernelKind::BiotSavart: {
            const double rr = r[0] * r[0] + r[1] * r[1];
            if (rr == 0.0) return {0.0, 0.0};
            const double f = alpha_ / (rr + delta2_);
            const Vec rem = table_->interpolate(r[0], r[1]);
            return {-r[1] * f + rem[0], r[0] * f + rem[1]};
        }
        case KernelKind::SmoothFourier: {
            bool origin = true;
            for (int j = 0; j < dim_; ++j) origin = origin && r[j] == 0.0;
            if (origin) return {0.0, 0.0};
            return fourier_.eval(r);
        }
        }
        return {0.0, 0.0};
    }

    /// Fourier coefficients K_hat(k) per component (K = sum K_hat(k) exp(2 pi i k.x)).
    /// For Biot-Savart the unregularized (delta = 0) kernel is used.
    std::array<Complex, kMaxDim> multiplier(const int* k) const;

private:
    KernelKind kind_ = KernelKind::Zero;
    int dim_ = 1;
    double alpha_ = 0.0;
    double delta_ = 0.0;
    double delta2_ = 0.0;
    bool antisymmetric_ = true;
    bool divergence_free_ = true;
    FourierVectorField fourier_;
    std::shared_ptr<const BiotSavartTable> table_;
};

/// Spectral convolution (K * rho)(x) = integral K(x - y) rho(y) dy on the grid of rho.
/// Returns a vector field with dim components. Throws InvalidArgument on a dimension
/// mismatch or when the kernel's modes are not resolved by the grid.
GridField convolve(const Kernel& kernel, const GridField& rho);

} // namespace chaoslab
