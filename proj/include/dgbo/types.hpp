#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace dgbo {

/// A point in the control space. Native (µrad) or transformed coordinates,
/// depending on context; box-normalized coordinates are also Vectors.
using Vector = Eigen::VectorXd;
/// Row-major collections of points use one row per point.
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define DGBO_DEFINE_ERROR(Name)                 \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

DGBO_DEFINE_ERROR(InvalidPairing);
DGBO_DEFINE_ERROR(IndexOutOfRange);
DGBO_DEFINE_ERROR(DimensionError);
DGBO_DEFINE_ERROR(InvalidBounds);
DGBO_DEFINE_ERROR(InvalidData);
DGBO_DEFINE_ERROR(InvalidInput);
DGBO_DEFINE_ERROR(NumericalFailure);
DGBO_DEFINE_ERROR(InternalError);
DGBO_DEFINE_ERROR(InvalidReferencePoint);
DGBO_DEFINE_ERROR(ConfigError);
DGBO_DEFINE_ERROR(IoError);
DGBO_DEFINE_ERROR(EmptyAggregate);

#undef DGBO_DEFINE_ERROR

inline void require_dim(const Vector& v, std::size_t dim, const char* what)
{
    if (static_cast<std::size_t>(v.size()) != dim) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(dim) +
                             ", got " + std::to_string(v.size()));
    }
}

/// Axis-aligned box [lower, upper] with lower < upper on every axis.
struct Box {
    Vector lower;
    Vector upper;

    Box() = default;
    Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) { validate(); }

    static Box uniform(std::size_t dim, double lo, double hi)
    {
        return Box(Vector::Constant(static_cast<Eigen::Index>(dim), lo),
                   Vector::Constant(static_cast<Eigen::Index>(dim), hi));
    }
    static Box unit(std::size_t dim) { return uniform(dim, 0.0, 1.0); }

    std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
    Vector width() const { return upper - lower; }
    double diagonal() const { return width().norm(); }

    void validate() const
    {
        if (lower.size() != upper.size() || lower.size() == 0) {
            throw InvalidBounds("box: lower/upper dimension mismatch or empty");
        }
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
                throw InvalidBounds("box: axis " + std::to_string(i) + " requires finite lower < upper");
            }
        }
    }

    bool contains(const Vector& x, double tol = 0.0) const
    {
        return x.size() == lower.size() && ((x.array() >= lower.array() - tol).all()) &&
               ((x.array() <= upper.array() + tol).all());
    }

    Vector clip(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

    Vector to_unit(const Vector& x) const { return ((x - lower).array() / width().array()).matrix(); }
    Vector from_unit(const Vector& u) const { return lower + (u.array() * width().array()).matrix(); }
};

}  // namespace dgbo
