#pragma once

#include "chaoslab/rng.hpp"
#include "chaoslab/torus.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace chaoslab {

using WaveVector = std::array<int, kMaxDim>;

/// One real Fourier mode of a vector field: sin_coef*sin(2 pi k.x) + cos_coef*cos(2 pi k.x).
struct VectorMode {
    WaveVector k{};
    Vec sin_coef{};
    Vec cos_coef{};
};

/// Band-limited vector field on the d-torus given as a finite real Fourier sum.
/// Used both for smooth interaction kernels and for the confinement force.
class FourierVectorField {
public:
    FourierVectorField() = default;
    FourierVectorField(int dim, std::vector<VectorMode> modes);

    /// K = grad-perp(psi) for a 2D stream function psi = sum a cos(2 pi k.x) + b sin(2 pi k.x),
    /// given as (k, a, b) triples. Divergence-free by construction; odd when every b is zero.
    struct StreamMode {
        WaveVector k{};
        double cos_amp = 0.0;
        double sin_amp = 0.0;
    };
    static FourierVectorField from_stream_function(const std::vector<StreamMode>& modes);

    int dim() const { return dim_; }
    const std::vector<VectorMode>& modes() const { return modes_; }
    bool empty() const { return modes_.empty(); }

    Vec eval(const double* x) const;

    /// True when all cosine coefficients vanish, i.e. F(-x) = -F(x).
    bool is_odd() const;
    /// True when k . sin_coef = k . cos_coef = 0 for every mode.
    bool is_divergence_free() const;
    /// Largest |k_j| over all modes.
    int max_wavenumber() const;
    /// max |F| sampled on an n^d grid.
    double sup_norm(int n = 256) const;

    FourierVectorField scaled(double factor) const;

private:
    int dim_ = 1;
    std::vector<VectorMode> modes_;
};

/// Scalar mode a*cos(2 pi k.x) + b*sin(2 pi k.x).
struct ScalarMode {
    WaveVector k{};
    double cos_amp = 0.0;
    double sin_amp = 0.0;
};

/// Probability density 1 + sum of real Fourier modes on the d-torus (unit mass).
/// The library of named initial conditions lives here.
class FourierDensity {
public:
    FourierDensity() = default;
    FourierDensity(int dim, std::vector<ScalarMode> modes);

    static FourierDensity uniform(int dim);
    /// 1 + A sin(2 pi x1) sin(2 pi x2).
    static FourierDensity taylor_green(double amplitude);
    /// Random band-limited perturbation with |k_j| <= kmax, shifted/scaled so the
    /// density stays >= min_density.
    static FourierDensity random_band_limited(int dim, int kmax, std::uint64_t seed, double min_density);

    int dim() const { return dim_; }
    const std::vector<ScalarMode>& modes() const { return modes_; }

    double eval(const double* x) const;
    /// 1 + sum |a| + |b|, an upper bound used for rejection sampling.
    double upper_bound() const;
    /// 1 - sum |a| + |b|, a lower bound on the density.
    double lower_bound() const;
    /// Exact mean of the density over the axis-aligned box [lo, hi] (per coordinate).
    double box_average(const double* lo, const double* hi) const;
    int max_wavenumber() const;

    /// Draws one point by rejection sampling from the uniform proposal.
    TorusPoint sample(RngStream& rng) const;

private:
    int dim_ = 1;
    std::vector<ScalarMode> modes_;
};

} // namespace chaoslab
