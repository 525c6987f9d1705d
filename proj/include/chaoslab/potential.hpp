#pragma once

#include "chaoslab/torus.hpp"

#include <array>
#include <vector>

namespace chaoslab {

/// Bounded matrix field V on the 2-torus with div V = K for the periodic Biot-Savart
/// kernel K (row convention K_a = sum_b d_b V_ab).
///
/// Diagonal entries carry the local arctan construction,
///   V11 = -alpha phi arctan(x1/x2) + psi11,   V22 = alpha phi arctan(x2/x1) + psi22,
/// with phi a smooth radial bump supported in (-1/2,1/2)^2. The periodizing correction
/// solves d1 psi11 = f1 - <f1>_{x1} along every x1-line spectrally; the line means of K
/// are sawtooth profiles that no periodic diagonal entry can absorb, so they go into the
/// off-diagonal entries V12(x2) and V21(x1), which are continuous piecewise quadratics.
///
/// Values are tabulated at cell centres x = -1/2 + (i + 1/2)/n, which never lie on the
/// arctan branch lines x1 = 0 or x2 = 0.
struct PotentialMatrix {
    int n = 0;
    double alpha = 0.0;
    /// entries[a][b] is V_ab tabulated row-major with index i*n + j for (x1_i, x2_j)
    std::array<std::array<std::vector<double>, 2>, 2> entries;
    double norm_inf = 0.0;  ///< max over entries and cells of |V_ab|

    double coordinate(int i) const { return -0.5 + (i + 0.5) / n; }
    double at(int a, int b, int i, int j) const
    {
        return entries[a][b][static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
    }
};

/// Radial C-infinity bump: 1 for |x| <= inner, 0 for |x| >= outer.
struct BumpFunction {
    double inner = 0.2;
    double outer = 0.4;

    double value(double r) const;
    double derivative(double r) const;  ///< d/dr
};

/// Builds V for the periodic Biot-Savart law with the given alpha on an n^2 cell-centred grid.
/// Throws InvalidArgument when n < 32 or not a power of two.
PotentialMatrix build_biot_savart_potential(int grid_size, double alpha = 0.15915494309189535);

/// Result of comparing the finite-difference divergence of V with the exact kernel.
struct DivergenceResidual {
    double max_residual = 0.0;  ///< max |div V - K| over tested cells
    double kernel_norm = 0.0;   ///< max |K| over tested cells
    std::size_t tested = 0;
    double relative() const { return kernel_norm > 0.0 ? max_residual / kernel_norm : max_residual; }
};

/// Central-difference divergence of V against the exact periodic kernel, skipping cells
/// within `exclusion_radius` of the origin and cells whose stencil touches a branch line.
DivergenceResidual divergence_residual(const PotentialMatrix& v, double exclusion_radius = 0.05);

} // namespace chaoslab
