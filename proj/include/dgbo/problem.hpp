#pragma once

#include "dgbo/types.hpp"

namespace dgbo {

/// One joint reading of the two raw objectives.
struct Measurement {
    double error_um = 0.0;      // beam position error
    double intensity_au = 0.0;  // beam intensity
};

/// Anything the optimization loops can measure: a native box and a
/// measurement at a native point. Implementations may carry state (a drift
/// clock), so one instance belongs to one trial.
class BlackBox {
public:
    virtual ~BlackBox() = default;
    virtual const Box& box() const = 0;
    virtual Measurement measure(const Vector& native) = 0;
};

}  // namespace dgbo
