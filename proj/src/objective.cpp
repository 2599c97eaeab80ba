#include "dgbo/objective.hpp"

#include <cmath>
#include <string>

namespace dgbo {

void NormalizationBounds::validate() const
{
    if (!std::isfinite(e_min) || !std::isfinite(e_max) || !(e_max > e_min)) {
        throw InvalidInput("normalization: requires finite e_max > e_min");
    }
    if (!std::isfinite(i_min) || !std::isfinite(i_max) || !(i_max > i_min)) {
        throw InvalidInput("normalization: requires finite i_max > i_min");
    }
}

namespace {

double clamp_unit(double v, std::size_t* counter)
{
    if (v < 0.0 || v > 1.0) {
        if (counter) ++*counter;
        return v < 0.0 ? 0.0 : 1.0;
    }
    return v;
}

}  // namespace

double scale_error(double error_um, const NormalizationBounds& b, ClampCounts* counts)
{
    if (!std::isfinite(error_um)) throw InvalidInput("scale_error: non-finite position error");
    return clamp_unit((error_um - b.e_min) / (b.e_max - b.e_min), counts ? &counts->error : nullptr);
}

double scale_intensity(double intensity_au, const NormalizationBounds& b, ClampCounts* counts)
{
    if (!std::isfinite(intensity_au)) throw InvalidInput("scale_intensity: non-finite intensity");
    return clamp_unit((intensity_au - b.i_min) / (b.i_max - b.i_min), counts ? &counts->intensity : nullptr);
}

double scalarize(double e_scaled, double i_scaled)
{
    if (!(e_scaled >= 0.0 && e_scaled <= 1.0) || !(i_scaled >= 0.0 && i_scaled <= 1.0)) {
        throw InvalidInput("scalarize: inputs must lie in [0, 1], got (" + std::to_string(e_scaled) + ", " +
                           std::to_string(i_scaled) + ")");
    }
    return e_scaled - i_scaled;
}

}  // namespace dgbo
