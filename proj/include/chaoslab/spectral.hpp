#pragma once

#include "chaoslab/grid_field.hpp"

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace chaoslab {

using Complex = std::complex<double>;

/// Real-to-complex FFT of rank `dim` on an n^dim periodic grid (FFTW backed).
/// The forward transform is normalized so that spectrum[k] is the Fourier coefficient
/// f_hat(k) = mean of f(x) exp(-2 pi i k.x); inverse() is its exact inverse.
/// Instances are immutable after construction and safe to share across threads.
class Fft {
public:
    Fft(int n, int dim);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int n() const { return n_; }
    int dim() const { return dim_; }
    std::size_t real_size() const { return real_size_; }
    std::size_t spectral_size() const { return spectral_size_; }

    void forward(std::span<const double> in, std::span<Complex> out) const;
    void inverse(std::span<const Complex> in, std::span<double> out) const;

    std::vector<Complex> forward(std::span<const double> in) const;
    std::vector<double> inverse(std::span<const Complex> in) const;

    /// Signed integer wavevector of spectral entry `index` (first dim entries written).
    void wavevector(std::size_t index, int* k) const;

    /// True if any |k_j| equals n/2 (Nyquist plane).
    bool is_nyquist(const int* k) const;

    /// Shared, cached instance for (n, dim).
    static std::shared_ptr<const Fft> get(int n, int dim);

private:
    int n_;
    int dim_;
    std::size_t real_size_;
    std::size_t spectral_size_;
    void* plan_forward_;
    void* plan_inverse_;
};

/// Max |div v| of a vector field computed spectrally, relative to max |v|.
double spectral_divergence_relative(const GridField& vector_field);

/// Exact cell averages of a band-limited field: entry i holds the mean over the cell
/// [i/n, (i+1)/n)^dim (Nyquist modes dropped).
GridField cell_average(const GridField& field);

/// Averages blocks of factor^dim cells; n must be divisible by factor.
GridField coarsen(const GridField& cell_averages, int factor);

/// Resamples a band-limited field onto a grid of size m by spectral truncation/padding.
GridField spectral_resample(const GridField& field, int m);

} // namespace chaoslab
