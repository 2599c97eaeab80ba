#pragma once

#include "dgbo/acquisition.hpp"
#include "dgbo/objective.hpp"
#include "dgbo/problem.hpp"
#include "dgbo/surrogate.hpp"
#include "dgbo/transform.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dgbo {

enum class AlgorithmKind { domain_guided, standard_bo, turbo, mobo, transform_only, annealing_only };

std::string to_string(AlgorithmKind kind);
/// Throws ConfigError on an unknown name.
AlgorithmKind algorithm_kind_from_string(const std::string& name);
const std::vector<AlgorithmKind>& all_algorithm_kinds();

struct TurboSettings {
    double length_init = 0.8;
    double length_min = 0.0078125;  // 0.5^7
    double length_max = 1.6;
    int success_tolerance = 3;
    /// Consecutive failures before halving; 0 means "input dimension".
    int failure_tolerance = 0;
    /// Relative margin a new value must beat the incumbent by.
    double improvement_tolerance = 1e-3;
};

/// Single trust region of the TuRBO baseline: side length and streak
/// counters. Only one counter is nonzero at a time.
class TrustRegionState {
public:
    enum class Event { none, expanded, shrunk, restarted };

    TrustRegionState(const TurboSettings& settings, std::size_t dim);

    /// Records the outcome of one proposal and applies the resize rule:
    /// success_tolerance consecutive successes double the length (capped at
    /// length_max), failure_tolerance consecutive failures halve it. A halving
    /// that would drop below length_min restarts the region at length_init.
    /// Both counters reset whenever the length changes.
    Event record(bool success);

    bool is_improvement(double candidate, double incumbent) const
    {
        return candidate < incumbent - improvement_tolerance_ * std::abs(incumbent);
    }

    double length() const { return length_; }
    int success_count() const { return success_count_; }
    int failure_count() const { return failure_count_; }
    int success_tolerance() const { return success_tolerance_; }
    int failure_tolerance() const { return failure_tolerance_; }
    double length_min() const { return length_min_; }
    double length_max() const { return length_max_; }

private:
    double length_;
    double length_init_;
    double length_min_;
    double length_max_;
    int success_tolerance_;
    int failure_tolerance_;
    double improvement_tolerance_;
    int success_count_ = 0;
    int failure_count_ = 0;
};

std::string to_string(TrustRegionState::Event event);

struct OptimizerSpec {
    AlgorithmKind kind = AlgorithmKind::standard_bo;
    AnnealingSchedule schedule = AnnealingSchedule::constant(1.0);
    std::optional<PairedTransform> transform;
    std::uint64_t seed = 0;
    std::size_t n_init = 4;
    std::size_t budget = 150;
    FitSettings fit;
    MaximizerSettings acquisition;
    TurboSettings turbo;

    /// Spec with the default schedule for `kind`: reverse_linear(1.0, 0.01)
    /// for domain_guided and annealing_only, constant(1.0) otherwise. The
    /// transform is kept only for kinds that use one.
    static OptimizerSpec for_kind(AlgorithmKind kind, std::optional<PairedTransform> transform, std::uint64_t seed);

    /// Throws ConfigError when the kind/transform/schedule combination or the
    /// budget is invalid.
    void validate() const;
};

struct TraceRow {
    std::size_t iter = 0;
    Vector point;  // native coordinates actually evaluated
    double error_um = 0.0;
    double intensity_au = 0.0;
    double f = 0.0;
    double run_min_error = 0.0;
    double run_max_intensity = 0.0;
    double run_min_f = 0.0;
    /// UCB weight used for the proposal; NaN for rows without one.
    double beta = 0.0;
};

enum class TrialStatus { ok, failed };

struct TrialTrace {
    std::size_t trial_id = 0;
    AlgorithmKind algorithm = AlgorithmKind::standard_bo;
    std::uint64_t seed = 0;
    std::vector<TraceRow> rows;
    TrialStatus status = TrialStatus::ok;
    std::string failure;
    ClampCounts clamps;
    /// MOBO only: Pareto front of (E, -I) after each row.
    std::vector<std::vector<Objectives2>> fronts;
    /// TuRBO only: trust-region event and length after each proposal.
    std::vector<TrustRegionState::Event> region_events;
    std::vector<double> region_lengths;

    bool ok() const { return status == TrialStatus::ok; }
};

/// Seeded uniform sampler over a box. The initial design is its first
/// n_init draws; TuRBO restarts continue the same stream.
class UniformSampler {
public:
    explicit UniformSampler(std::uint64_t seed);
    Vector next(const Box& box);

private:
    std::mt19937_64 rng_;
};

struct InitialDesign {
    std::vector<Vector> points;
    /// Recorded readings, reused by every algorithm of a trial.
    std::vector<Measurement> measurements;
};

InitialDesign draw_initial_design(const Box& box, std::size_t n, std::uint64_t seed);
void measure_design(InitialDesign& design, BlackBox& problem);

/// Derives an independent 64-bit seed from a base seed and a stream tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

TrialTrace run_standard_bo(const OptimizerSpec& spec, BlackBox& problem, Objective& objective,
                           const InitialDesign& design);
TrialTrace run_domain_guided(const OptimizerSpec& spec, BlackBox& problem, Objective& objective,
                             const InitialDesign& design);
TrialTrace run_ablation_variant(const OptimizerSpec& spec, BlackBox& problem, Objective& objective,
                                const InitialDesign& design);
TrialTrace run_turbo(const OptimizerSpec& spec, BlackBox& problem, Objective& objective,
                     const InitialDesign& design);
/// Objective is used only to report f alongside the raw objectives.
TrialTrace run_mobo(const OptimizerSpec& spec, BlackBox& problem, Objective& objective, const InitialDesign& design);

/// Dispatches on spec.kind.
TrialTrace run_trial(const OptimizerSpec& spec, BlackBox& problem, Objective& objective, const InitialDesign& design);

}  // namespace dgbo
