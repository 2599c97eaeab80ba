#pragma once

#include "dgbo/types.hpp"

#include <cstddef>

namespace dgbo {

/// Min-max normalization bounds for the two raw objectives.
struct NormalizationBounds {
    double e_min = 0.0;  // µm
    double e_max = 1.0;  // µm
    double i_min = 0.0;  // a.u.
    double i_max = 1.0;  // a.u.

    void validate() const;
};

struct ClampCounts {
    std::size_t error = 0;
    std::size_t intensity = 0;
};

/// (E - e_min) / (e_max - e_min), clamped to [0, 1]. Clamp events are
/// counted in `counts` when given.
double scale_error(double error_um, const NormalizationBounds& b, ClampCounts* counts = nullptr);
double scale_intensity(double intensity_au, const NormalizationBounds& b, ClampCounts* counts = nullptr);

/// Equally weighted scalarization e_scaled - i_scaled, in [-1, 1].
/// Throws InvalidInput when an argument lies outside [0, 1].
double scalarize(double e_scaled, double i_scaled);

/// Scalarized minimization target with running clamp diagnostics.
/// Not thread-safe; one instance per trial.
class Objective {
public:
    explicit Objective(NormalizationBounds bounds) : bounds_(bounds) { bounds_.validate(); }

    double operator()(double error_um, double intensity_au)
    {
        return scalarize(scale_error(error_um, bounds_, &counts_), scale_intensity(intensity_au, bounds_, &counts_));
    }

    const NormalizationBounds& bounds() const { return bounds_; }
    const ClampCounts& clamp_counts() const { return counts_; }

private:
    NormalizationBounds bounds_;
    ClampCounts counts_;
};

}  // namespace dgbo
