#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace chaoslab {

inline constexpr int kMaxDim = 2;

using Vec = std::array<double, kMaxDim>;

/// Point on the unit torus [0,1)^d, d in {1,2}. Unused trailing coordinates are zero.
struct TorusPoint {
    int dim = 1;
    Vec coords{};

    double operator[](int j) const { return coords[static_cast<std::size_t>(j)]; }
};

/// Minimal-image difference of two torus points, each component in [-1/2, 1/2).
struct Displacement {
    int dim = 1;
    Vec components{};

    double operator[](int j) const { return components[static_cast<std::size_t>(j)]; }
    double norm2() const;
};

/// Reduces one coordinate into [0,1). Assumes a finite input.
inline double wrap_coordinate(double x)
{
    double w = x - std::floor(x);
    // x slightly below an integer can round up to exactly 1.0
    return w >= 1.0 ? 0.0 : w;
}

/// Minimal image of a raw difference, in [-1/2, 1/2); +1/2 maps to -1/2.
inline double minimal_image(double r)
{
    double m = r - std::floor(r + 0.5);
    if (m >= 0.5) m -= 1.0;
    if (m < -0.5) m += 1.0;
    return m;
}

/// Wraps raw coordinates onto the torus. Throws InvalidArgument on non-finite input
/// or unsupported dimension.
TorusPoint wrap(std::span<const double> raw);

/// Minimal-image displacement x - y. Throws InvalidArgument on dimension mismatch.
Displacement displacement(const TorusPoint& x, const TorusPoint& y);

} // namespace chaoslab
