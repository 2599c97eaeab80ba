#pragma once

#include "dgbo/types.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace dgbo {

enum class ScheduleKind { constant, reverse_linear };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& name);

/// UCB exploration weight as a function of the iteration index.
/// reverse_linear grows without bound: beta(t) = beta0 + c t.
struct AnnealingSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    double beta0 = 1.0;
    double c = 0.0;

    static AnnealingSchedule constant(double beta0) { return {ScheduleKind::constant, beta0, 0.0}; }
    static AnnealingSchedule reverse_linear(double beta0, double c) { return {ScheduleKind::reverse_linear, beta0, c}; }

    void validate() const;
    double beta(std::size_t t) const;
};

inline double beta(const AnnealingSchedule& s, std::size_t t) { return s.beta(t); }

/// mean + sqrt(beta) * sqrt(variance). Throws InvalidInput on negative
/// variance or beta.
double ucb(double mean, double variance, double beta);

/// Bi-objective vector, both components minimized.
using Objectives2 = std::array<double, 2>;

/// a weakly dominates b and differs from it somewhere.
bool dominates(const Objectives2& a, const Objectives2& b);

/// Mutually non-dominated set of bi-objective points, sorted ascending in
/// the first objective (hence strictly descending in the second).
class ParetoFront {
public:
    ParetoFront() = default;
    explicit ParetoFront(const std::vector<Objectives2>& candidates);

    /// Inserts p unless it is weakly dominated by a member; removes members p
    /// dominates. Returns whether p was inserted.
    bool insert(const Objectives2& p);

    const std::vector<Objectives2>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    /// Area dominated by the front and bounded above by `ref`. Members that do
    /// not dominate ref contribute only their clipped part.
    double hypervolume(const Objectives2& ref) const;

private:
    std::vector<Objectives2> points_;
};

/// Exact expected hypervolume improvement of a candidate whose two
/// objectives are independent Gaussians N(mean_i, stddev_i^2).
///
/// Uses the strip decomposition of the non-dominated region over the sorted
/// front: with front points (a_1,b_1)..(a_k,b_k), a_0 = -inf, a_{k+1} = r_1
/// and b_0 = r_2,
///   EHVI = sum_i [psi_1(a_{i+1}) - psi_1(a_i)] * psi_2(b_i),
///   psi_j(z) = E[(z - Y_j)^+].
/// Throws InvalidReferencePoint when some front point exceeds ref, and
/// InvalidInput on a negative stddev.
double ehvi_2d(const ParetoFront& front, const Objectives2& ref, const Objectives2& mean, const Objectives2& stddev);

/// Batched acquisition: one value per row of the input matrix.
using AcquisitionFunction = std::function<Vector(const Matrix&)>;

struct MaximizerSettings {
    std::size_t budget = 2000;
    std::size_t refine_starts = 3;
    std::size_t sweeps = 3;
    /// First coordinate step, as a fraction of each box width; halves per sweep.
    double initial_step = 0.1;
};

/// Scrambled (randomly shifted) Sobol points in `box`, one per row.
Matrix sobol_candidates(const Box& box, std::size_t count, std::mt19937_64& rng);

/// Low-discrepancy sweep over `box` followed by coordinate-wise refinement
/// from the best `refine_starts` candidates. Ties go to the first candidate
/// seen. Deterministic for a given generator state.
Vector maximize_acquisition(const AcquisitionFunction& acquisition, const Box& box, std::mt19937_64& rng,
                            const MaximizerSettings& settings = {});

}  // namespace dgbo
