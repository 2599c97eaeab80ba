#include "dgbo/transform.hpp"

#include <cmath>
#include <string>

namespace dgbo {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

PairedTransform::PairedTransform(std::size_t dim, std::vector<KnobPair> pairs)
    : dim_(dim), pairs_(std::move(pairs))
{
    if (dim_ < 2 * pairs_.size()) {
        throw InvalidPairing("paired transform: " + std::to_string(pairs_.size()) +
                             " pairs do not fit in dimension " + std::to_string(dim_));
    }
    std::vector<bool> used(dim_, false);
    auto claim = [&](std::size_t index) {
        if (index >= dim_) {
            throw IndexOutOfRange("paired transform: index " + std::to_string(index) +
                                  " outside dimension " + std::to_string(dim_));
        }
        if (used[index]) {
            throw InvalidPairing("paired transform: index " + std::to_string(index) +
                                 " appears in more than one pair");
        }
        used[index] = true;
    };
    for (const auto& p : pairs_) {
        if (p.delay_index == p.ref_index) {
            throw InvalidPairing("paired transform: pair uses index " + std::to_string(p.delay_index) +
                                 " twice");
        }
        claim(p.delay_index);
        claim(p.ref_index);
    }
    for (std::size_t i = 0; i < dim_; ++i) {
        if (!used[i]) unpaired_.push_back(i);
    }

    const auto n = static_cast<Eigen::Index>(dim_);
    matrix_ = Matrix::Zero(n, n);
    for (std::size_t i : unpaired_) {
        matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    }
    for (const auto& p : pairs_) {
        const auto d = static_cast<Eigen::Index>(p.delay_index);
        const auto r = static_cast<Eigen::Index>(p.ref_index);
        matrix_(d, d) = kInvSqrt2;
        matrix_(d, r) = -kInvSqrt2;
        matrix_(r, d) = kInvSqrt2;
        matrix_(r, r) = kInvSqrt2;
    }
}

Vector PairedTransform::forward(const Vector& native) const
{
    require_dim(native, dim_, "paired transform forward");
    Vector out = native;
    for (const auto& p : pairs_) {
        const double kd = native[static_cast<Eigen::Index>(p.delay_index)];
        const double kr = native[static_cast<Eigen::Index>(p.ref_index)];
        out[static_cast<Eigen::Index>(p.delay_index)] = kInvSqrt2 * (kd - kr);
        out[static_cast<Eigen::Index>(p.ref_index)] = kInvSqrt2 * (kd + kr);
    }
    return out;
}

Vector PairedTransform::inverse(const Vector& transformed) const
{
    require_dim(transformed, dim_, "paired transform inverse");
    Vector out = transformed;
    for (const auto& p : pairs_) {
        const double diff = transformed[static_cast<Eigen::Index>(p.delay_index)];
        const double common = transformed[static_cast<Eigen::Index>(p.ref_index)];
        out[static_cast<Eigen::Index>(p.delay_index)] = kInvSqrt2 * (diff + common);
        out[static_cast<Eigen::Index>(p.ref_index)] = kInvSqrt2 * (common - diff);
    }
    return out;
}

Box PairedTransform::transform_bounds(const Box& native) const
{
    native.validate();
    if (native.dim() != dim_) {
        throw DimensionError("transform_bounds: box dimension " + std::to_string(native.dim()) +
                             " does not match transform dimension " + std::to_string(dim_));
    }
    Vector lo = native.lower;
    Vector hi = native.upper;
    for (const auto& p : pairs_) {
        const auto d = static_cast<Eigen::Index>(p.delay_index);
        const auto r = static_cast<Eigen::Index>(p.ref_index);
        // diff = (kd - kr)/sqrt2 is extremal at opposite corners, common at equal ones.
        lo[d] = kInvSqrt2 * (native.lower[d] - native.upper[r]);
        hi[d] = kInvSqrt2 * (native.upper[d] - native.lower[r]);
        lo[r] = kInvSqrt2 * (native.lower[d] + native.lower[r]);
        hi[r] = kInvSqrt2 * (native.upper[d] + native.upper[r]);
    }
    return Box(lo, hi);
}

}  // namespace dgbo
