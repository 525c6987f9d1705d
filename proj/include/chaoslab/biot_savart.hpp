#pragma once

#include "chaoslab/torus.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

namespace chaoslab {

/// Periodic 2D Biot-Savart law K = 2 pi alpha grad-perp Delta^{-1}(delta_0 - 1) on the unit
/// torus, evaluated by Ewald splitting with a Gaussian of width `split_width`:
///
///   K(r) = alpha * r_perp / |r|^2                              (free-space singular part)
///        + alpha * R(r)                                         (smooth remainder on the cell)
///
/// R collects the Gaussian-screened near field of the central cell minus the free-space
/// term, the screened periodic images, and the long-range Fourier sum. All quantities
/// here are per unit alpha; r_perp = (-r2, r1).
class PeriodicBiotSavart {
public:
    static constexpr double kDefaultSplitWidth = 0.15;

    explicit PeriodicBiotSavart(double split_width = kDefaultSplitWidth);

    double split_width() const { return width_; }

    /// Smooth remainder R(r) for r in the closed cell [-1/2,1/2]^2; R(0) = 0.
    Vec remainder(const double* r) const;
    /// Full periodic kernel (per unit alpha); returns 0 at r = 0.
    Vec velocity(const double* r) const;

private:
    double width_;
    int image_range_;
    int kmax_;
    std::vector<double> coef_;  // Gaussian-damped 1/|k|^2 on the (k1 >= 0) half plane
};

/// Tabulated remainder alpha * R on (n+1)^2 nodes covering the closed cell [-1/2,1/2]^2,
/// interpolated bilinearly. Odd symmetry is imposed exactly on the nodes.
class BiotSavartTable {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    static BiotSavartTable build(double alpha, int n, double split_width = PeriodicBiotSavart::kDefaultSplitWidth);

    /// Loads from `dir` if a matching cache file exists, otherwise builds and stores it.
    static BiotSavartTable cached(double alpha, int n, const std::optional<std::filesystem::path>& dir);

    int n() const { return n_; }
    double alpha() const { return alpha_; }

    Vec interpolate(double r1, double r2) const
    {
        const double u = (r1 + 0.5) * n_;
        const double v = (r2 + 0.5) * n_;
        int i = static_cast<int>(u);
        int j = static_cast<int>(v);
        i = i < 0 ? 0 : (i >= n_ ? n_ - 1 : i);
        j = j < 0 ? 0 : (j >= n_ ? n_ - 1 : j);
        const double fx = u - i;
        const double fy = v - j;
        const std::size_t stride = static_cast<std::size_t>(n_ + 1);
        const double* p00 = &data_[2 * (static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(j))];
        const double* p01 = p00 + 2;
        const double* p10 = p00 + 2 * stride;
        const double* p11 = p10 + 2;
        const double w00 = (1 - fx) * (1 - fy), w01 = (1 - fx) * fy, w10 = fx * (1 - fy), w11 = fx * fy;
        return {w00 * p00[0] + w01 * p01[0] + w10 * p10[0] + w11 * p11[0],
                w00 * p00[1] + w01 * p01[1] + w10 * p10[1] + w11 * p11[1]};
    }

    void save(const std::filesystem::path& file) const;
    static std::optional<BiotSavartTable> load(const std::filesystem::path& file, double alpha, int n);
    static std::string cache_file_name(double alpha, int n);

private:
    int n_ = 0;
    double alpha_ = 0.0;
    double split_width_ = 0.0;
    std::vector<double> data_;
};

} // namespace chaoslab
