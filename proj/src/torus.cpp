#include "chaoslab/torus.hpp"

#include "chaoslab/error.hpp"

#include <cmath>
#include <string>

namespace chaoslab {

double Displacement::norm2() const
{
    double s = 0.0;
    for (int j = 0; j < dim; ++j) s += components[j] * components[j];
    return s;
}

TorusPoint wrap(std::span<const double> raw)
{
    if (raw.empty() || raw.size() > static_cast<std::size_t>(kMaxDim)) {
        throw InvalidArgument("wrap: dimension " + std::to_string(raw.size()) + " not in {1,2}");
    }
    TorusPoint p;
    p.dim = static_cast<int>(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        if (!std::isfinite(raw[j])) {
            throw InvalidArgument("wrap: non-finite coordinate " + std::to_string(j));
        }
        p.coords[j] = wrap_coordinate(raw[j]);
    }
    return p;
}

Displacement displacement(const TorusPoint& x, const TorusPoint& y)
{
    if (x.dim != y.dim) {
        throw InvalidArgument("displacement: dimension mismatch (" + std::to_string(x.dim) + " vs " +
                              std::to_string(y.dim) + ")");
    }
    Displacement r;
    r.dim = x.dim;
    for (int j = 0; j < x.dim; ++j) r.components[j] = minimal_image(x.coords[j] - y.coords[j]);
    return r;
}

} // namespace chaoslab
