#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace chaoslab {

enum class FieldKind { Density, Vorticity, Scalar, Vector };

std::string to_string(FieldKind kind);
FieldKind field_kind_from_string(const std::string& name);

/// Periodic field sampled on a uniform n^dim grid over [0,1)^dim, node i at x = i/n.
/// Storage is component-major, each component row-major with the last axis fastest.
struct GridField {
    int n = 0;
    int dim = 0;
    FieldKind kind = FieldKind::Scalar;
    int components = 1;
    double time = 0.0;
    std::vector<double> values;

    GridField() = default;
    GridField(int n, int dim, FieldKind kind, int components = 1);

    std::size_t size() const;  ///< points per component
    double cell_volume() const;
    std::span<double> component(int c);
    std::span<const double> component(int c) const;

    double mean(int c = 0) const;
    double min(int c = 0) const;
    double max(int c = 0) const;
    /// integral of the component over the torus (mean times unit volume)
    double integral(int c = 0) const { return mean(c); }
    /// integral of the squared component
    double l2_squared(int c = 0) const;

    /// Coordinates of grid node `index` (first `dim` entries of out are written).
    void node_coords(std::size_t index, double* out) const;

    /// Throws InvalidArgument when a density/vorticity kind invariant is violated:
    /// density values >= -tol and unit mass within tol; vorticity mean zero within tol.
    void check_invariants(double tol = 1e-12) const;
};

/// Requires equal n, dim and component count.
void require_same_grid(const GridField& a, const GridField& b, const char* who);

} // namespace chaoslab
