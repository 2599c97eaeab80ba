#pragma once

#include "dgbo/types.hpp"

#include <cstddef>
#include <vector>

namespace dgbo {

/// Two native knobs that act on the beam in the same way, one in each
/// branch. Their difference drives the position error; their sum steers both
/// beams together.
struct KnobPair {
    std::size_t delay_index = 0;
    std::size_t ref_index = 0;

    friend bool operator==(const KnobPair&, const KnobPair&) = default;
};

/// Block-diagonal orthogonal map from native knob space to
/// differential/common-mode space.
///
/// For every pair the 2x2 block (1/sqrt 2) [[1, -1], [1, 1]] maps
/// (k_delay, k_ref) to (v_diff, v_common). The differential coordinate is
/// stored at the pair's delay_index slot and the common coordinate at its
/// ref_index slot, so a transformed vector keeps the native dimension layout.
/// Unpaired axes pass through unchanged.
///
/// Immutable after construction.
class PairedTransform {
public:
    /// Throws InvalidPairing on a repeated index or a pair with equal
    /// indices, IndexOutOfRange when an index is >= dim.
    PairedTransform(std::size_t dim, std::vector<KnobPair> pairs);

    static PairedTransform identity(std::size_t dim) { return PairedTransform(dim, {}); }

    std::size_t dim() const { return dim_; }
    const std::vector<KnobPair>& pairs() const { return pairs_; }
    const std::vector<std::size_t>& unpaired() const { return unpaired_; }
    bool is_identity() const { return pairs_.empty(); }

    /// Dense d x d matrix M with v = M k.
    const Matrix& matrix() const { return matrix_; }

    Vector forward(const Vector& native) const;
    /// Applies M^T; M is orthogonal so this is the exact inverse.
    Vector inverse(const Vector& transformed) const;

    /// Tightest axis-aligned box containing the image of `native` under
    /// forward(). The image itself is a rotated box, so the result is a
    /// superset: points of the returned box may map back outside `native`.
    Box transform_bounds(const Box& native) const;

private:
    std::size_t dim_;
    std::vector<KnobPair> pairs_;
    std::vector<std::size_t> unpaired_;
    Matrix matrix_;
};

inline PairedTransform build_paired_transform(std::size_t dim, std::vector<KnobPair> pairs)
{
    return PairedTransform(dim, std::move(pairs));
}

}  // namespace dgbo
