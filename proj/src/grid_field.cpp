#include "chaoslab/grid_field.hpp"

#include "chaoslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace chaoslab {

std::string to_string(FieldKind kind)
{
    switch (kind) {
    case FieldKind::Density: return "density";
    case FieldKind::Vorticity: return "vorticity";
    case FieldKind::Scalar: return "scalar";
    case FieldKind::Vector: return "vector";
    }
    return "scalar";
}

FieldKind field_kind_from_string(const std::string& name)
{
    if (name == "density") return FieldKind::Density;
    if (name == "vorticity") return FieldKind::Vorticity;
    if (name == "scalar") return FieldKind::Scalar;
    if (name == "vector") return FieldKind::Vector;
    throw InvalidArgument("unknown field kind '" + name + "'");
}

GridField::GridField(int n_, int dim_, FieldKind kind_, int components_)
    : n(n_), dim(dim_), kind(kind_), components(components_)
{
    if (n < 2 || dim < 1 || dim > 4 || components < 1) {
        throw InvalidArgument("GridField: need n >= 2, 1 <= dim <= 4, components >= 1");
    }
    values.assign(size() * static_cast<std::size_t>(components), 0.0);
}

std::size_t GridField::size() const
{
    std::size_t s = 1;
    for (int j = 0; j < dim; ++j) s *= static_cast<std::size_t>(n);
    return s;
}

double GridField::cell_volume() const { return 1.0 / static_cast<double>(size()); }

std::span<double> GridField::component(int c)
{
    return std::span<double>(values).subspan(static_cast<std::size_t>(c) * size(), size());
}

std::span<const double> GridField::component(int c) const
{
    return std::span<const double>(values).subspan(static_cast<std::size_t>(c) * size(), size());
}

double GridField::mean(int c) const
{
    const auto v = component(c);
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double GridField::min(int c) const
{
    const auto v = component(c);
    return *std::min_element(v.begin(), v.end());
}

double GridField::max(int c) const
{
    const auto v = component(c);
    return *std::max_element(v.begin(), v.end());
}

double GridField::l2_squared(int c) const
{
    const auto v = component(c);
    double s = 0.0;
    for (double x : v) s += x * x;
    return s / static_cast<double>(v.size());
}

void GridField::node_coords(std::size_t index, double* out) const
{
    for (int j = dim - 1; j >= 0; --j) {
        out[j] = static_cast<double>(index % static_cast<std::size_t>(n)) / n;
        index /= static_cast<std::size_t>(n);
    }
}

void GridField::check_invariants(double tol) const
{
    if (kind == FieldKind::Density) {
        if (min() < -tol) throw InvalidArgument("density field has negative values (min " + std::to_string(min()) + ")");
        if (std::abs(mean() - 1.0) > tol) {
            throw InvalidArgument("density field does not have unit mass (mass " + std::to_string(mean()) + ")");
        }
    } else if (kind == FieldKind::Vorticity) {
        if (std::abs(mean()) > tol) {
            throw InvalidArgument("vorticity field is not mean-zero (mean " + std::to_string(mean()) + ")");
        }
    }
}

void require_same_grid(const GridField& a, const GridField& b, const char* who)
{
    if (a.n != b.n || a.dim != b.dim || a.components != b.components) {
        throw InvalidArgument(std::string(who) + ": grid mismatch");
    }
}

} // namespace chaoslab
