#include "dgbo/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dgbo {

namespace {

constexpr std::uint64_t kStreamInit = 0x1'0001;
constexpr std::uint64_t kStreamAcquisition = 0x1'0002;
constexpr std::uint64_t kStreamFit = 0x1'0003;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string to_string(AlgorithmKind kind)
{
    switch (kind) {
    case AlgorithmKind::domain_guided:
        return "domain_guided";
    case AlgorithmKind::standard_bo:
        return "standard_bo";
    case AlgorithmKind::turbo:
        return "turbo";
    case AlgorithmKind::mobo:
        return "mobo";
    case AlgorithmKind::transform_only:
        return "transform_only";
    case AlgorithmKind::annealing_only:
        return "annealing_only";
    }
    return "unknown";
}

AlgorithmKind algorithm_kind_from_string(const std::string& name)
{
    for (AlgorithmKind k : all_algorithm_kinds()) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown algorithm kind '" + name + "'");
}

const std::vector<AlgorithmKind>& all_algorithm_kinds()
{
    static const std::vector<AlgorithmKind> kinds = {
        AlgorithmKind::domain_guided, AlgorithmKind::standard_bo,    AlgorithmKind::turbo,
        AlgorithmKind::mobo,          AlgorithmKind::transform_only, AlgorithmKind::annealing_only,
    };
    return kinds;
}

TrustRegionState::TrustRegionState(const TurboSettings& s, std::size_t dim)
    : length_(s.length_init),
      length_init_(s.length_init),
      length_min_(s.length_min),
      length_max_(s.length_max),
      success_tolerance_(s.success_tolerance),
      failure_tolerance_(s.failure_tolerance > 0 ? s.failure_tolerance : static_cast<int>(dim)),
      improvement_tolerance_(s.improvement_tolerance)
{
    if (!(length_min_ > 0.0) || !(length_min_ <= length_init_) || !(length_init_ <= length_max_)) {
        throw ConfigError("turbo: need 0 < length_min <= length_init <= length_max");
    }
    if (success_tolerance_ < 1 || failure_tolerance_ < 1) {
        throw ConfigError("turbo: success and failure tolerances must be positive");
    }
}

TrustRegionState::Event TrustRegionState::record(bool success)
{
    if (success) {
        ++success_count_;
        failure_count_ = 0;
    } else {
        ++failure_count_;
        success_count_ = 0;
    }
    if (success_count_ >= success_tolerance_) {
        length_ = std::min(2.0 * length_, length_max_);
        success_count_ = 0;
        return Event::expanded;
    }
    if (failure_count_ >= failure_tolerance_) {
        failure_count_ = 0;
        const double halved = 0.5 * length_;
        if (halved < length_min_) {
            length_ = length_init_;
            return Event::restarted;
        }
        length_ = halved;
        return Event::shrunk;
    }
    return Event::none;
}

std::string to_string(TrustRegionState::Event event)
{
    switch (event) {
    case TrustRegionState::Event::none:
        return "none";
    case TrustRegionState::Event::expanded:
        return "expanded";
    case TrustRegionState::Event::shrunk:
        return "shrunk";
    case TrustRegionState::Event::restarted:
        return "restarted";
    }
    return "unknown";
}

OptimizerSpec OptimizerSpec::for_kind(AlgorithmKind kind, std::optional<PairedTransform> transform,
                                      std::uint64_t seed)
{
    OptimizerSpec s;
    s.kind = kind;
    s.seed = seed;
    const bool annealed = kind == AlgorithmKind::domain_guided || kind == AlgorithmKind::annealing_only;
    s.schedule = annealed ? AnnealingSchedule::reverse_linear(1.0, 0.01) : AnnealingSchedule::constant(1.0);
    const bool transformed = kind == AlgorithmKind::domain_guided || kind == AlgorithmKind::transform_only;
    if (transformed) s.transform = std::move(transform);
    return s;
}

void OptimizerSpec::validate() const
{
    const std::string name = to_string(kind);
    const bool needs_transform = kind == AlgorithmKind::domain_guided || kind == AlgorithmKind::transform_only;
    const bool forbids_transform = kind == AlgorithmKind::annealing_only || kind == AlgorithmKind::standard_bo;
    if (needs_transform && !transform) throw ConfigError(name + " requires a coordinate transform");
    if (forbids_transform && transform) throw ConfigError(name + " must not carry a coordinate transform");
    if (kind == AlgorithmKind::transform_only || kind == AlgorithmKind::standard_bo || kind == AlgorithmKind::turbo) {
        if (schedule.kind != ScheduleKind::constant) throw ConfigError(name + " uses a constant schedule");
    }
    if (kind == AlgorithmKind::annealing_only && schedule.kind != ScheduleKind::reverse_linear) {
        throw ConfigError(name + " uses a reverse_linear schedule");
    }
    try {
        schedule.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(name + ": " + e.what());
    }
    if (n_init < 2) throw ConfigError(name + ": n_init must be at least 2");
    if (budget < n_init) throw ConfigError(name + ": budget must be at least n_init");
    if (fit.n_starts < 1) throw ConfigError(name + ": fit needs at least one start");
}

UniformSampler::UniformSampler(std::uint64_t seed) : rng_(derive_seed(seed, kStreamInit)) {}

Vector UniformSampler::next(const Box& box)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector u(box.dim());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = unit(rng_);
    return box.from_unit(u);
}

InitialDesign draw_initial_design(const Box& box, std::size_t n, std::uint64_t seed)
{
    UniformSampler sampler(seed);
    InitialDesign design;
    for (std::size_t i = 0; i < n; ++i) design.points.push_back(sampler.next(box));
    return design;
}

void measure_design(InitialDesign& design, BlackBox& problem)
{
    design.measurements.clear();
    for (const auto& p : design.points) design.measurements.push_back(problem.measure(p));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    auto mix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    return mix(mix(base) ^ (stream * 0xd1b54a32d192ed03ULL));
}

namespace {

// Accumulates trace rows and running extrema.
class TraceBuilder {
public:
    TraceBuilder(const OptimizerSpec& spec, Objective& objective) : objective_(objective)
    {
        trace_.algorithm = spec.kind;
        trace_.seed = spec.seed;
        trace_.rows.reserve(spec.budget);
    }

    double add(const Vector& native, const Measurement& m, double beta)
    {
        TraceRow row;
        row.iter = trace_.rows.size();
        row.point = native;
        row.error_um = m.error_um;
        row.intensity_au = m.intensity_au;
        row.f = objective_(m.error_um, m.intensity_au);
        row.beta = beta;
        if (trace_.rows.empty()) {
            row.run_min_error = row.error_um;
            row.run_max_intensity = row.intensity_au;
            row.run_min_f = row.f;
        } else {
            const TraceRow& prev = trace_.rows.back();
            row.run_min_error = std::min(prev.run_min_error, row.error_um);
            row.run_max_intensity = std::max(prev.run_max_intensity, row.intensity_au);
            row.run_min_f = std::min(prev.run_min_f, row.f);
        }
        trace_.rows.push_back(row);
        return row.f;
    }

    void fail(const std::string& why)
    {
        trace_.status = TrialStatus::failed;
        trace_.failure = why;
    }

    TrialTrace& trace() { return trace_; }

    TrialTrace finish()
    {
        trace_.clamps = objective_.clamp_counts();
        return std::move(trace_);
    }

private:
    Objective& objective_;
    TrialTrace trace_;
};

Measurement design_measurement(const InitialDesign& design, BlackBox& problem, std::size_t i)
{
    if (i < design.measurements.size()) return design.measurements[i];
    return problem.measure(design.points[i]);
}

void check_design(const OptimizerSpec& spec, const BlackBox& problem, const InitialDesign& design)
{
    spec.validate();
    if (design.points.size() != spec.n_init) {
        throw ConfigError("initial design holds " + std::to_string(design.points.size()) + " points, spec wants " +
                          std::to_string(spec.n_init));
    }
    for (const auto& p : design.points) require_dim(p, problem.box().dim(), "initial design point");
}

FitSettings fit_settings(const OptimizerSpec& spec, std::size_t iter, const std::optional<KernelParams>& warm)
{
    FitSettings fs = spec.fit;
    fs.seed = derive_seed(spec.seed, kStreamFit + 0x100 * iter);
    if (warm && warm->dim() > 0) fs.warm_start = warm;
    return fs;
}

// Shared loop of standard BO, domain-guided BO and both ablation variants.
// The surrogate models g(v) = f(clip(T^-1 v)) over the unit-normalized
// bounding box of the transformed native box; with the identity transform
// this is plain BO on the native box.
TrialTrace run_ucb_loop(const OptimizerSpec& spec, const PairedTransform& transform, BlackBox& problem,
                        Objective& objective, const InitialDesign& design)
{
    const Box& native = problem.box();
    if (transform.dim() != native.dim()) throw ConfigError("transform dimension does not match the problem");
    const Box search = transform.transform_bounds(native);
    const auto d = static_cast<Eigen::Index>(native.dim());

    TraceBuilder builder(spec, objective);
    Matrix X(spec.budget, d);
    Vector y(spec.budget);
    std::size_t n = 0;
    for (std::size_t i = 0; i < spec.n_init; ++i) {
        const Vector& x = design.points[i];
        X.row(static_cast<Eigen::Index>(n)) = search.to_unit(transform.forward(x)).transpose();
        y[static_cast<Eigen::Index>(n)] = builder.add(x, design_measurement(design, problem, i), kNaN);
        ++n;
    }

    std::mt19937_64 acq_rng(derive_seed(spec.seed, kStreamAcquisition));
    std::optional<KernelParams> warm;
    const Box unit = Box::unit(native.dim());
    try {
        for (std::size_t it = spec.n_init; it < spec.budget; ++it) {
            const double b = spec.schedule.beta(it - spec.n_init);
            const auto rows = static_cast<Eigen::Index>(n);
            const GpSurrogate gp = GpSurrogate::fit(X.topRows(rows), y.head(rows), fit_settings(spec, it, warm));
            warm = gp.params();
            const double root_beta = std::sqrt(b);
            auto acquisition = [&](const Matrix& U) {
                Vector mean, var;
                gp.predict(U, mean, var);
                return Vector(-mean.array() + root_beta * var.array().sqrt());
            };
            const Vector u = maximize_acquisition(acquisition, unit, acq_rng, spec.acquisition);
            const Vector x = native.clip(transform.inverse(search.from_unit(u)));
            X.row(rows) = u.transpose();
            y[rows] = builder.add(x, problem.measure(x), b);
            ++n;
        }
    } catch (const NumericalFailure& e) {
        builder.fail(e.what());
    }
    return builder.finish();
}

}  // namespace

TrialTrace run_standard_bo(const OptimizerSpec& spec, BlackBox& problem, Objective& objective,
                           const InitialDesign& design)
{
    if (spec.kind != AlgorithmKind::standard_bo) throw ConfigError("run_standard_bo: spec kind mismatch");
    check_design(spec, problem, design);
    return run_ucb_loop(spec, PairedTransform::identity(problem.box().dim()), problem, objective, design);
}

TrialTrace run_domain_guided(const OptimizerSpec& spec, BlackBox& problem, Objective& objective,
                             const InitialDesign& design)
{
    if (spec.kind != AlgorithmKind::domain_guided) throw ConfigError("run_domain_guided: spec kind mismatch");
    check_design(spec, problem, design);
    return run_ucb_loop(spec, *spec.transform, problem, objective, design);
}

TrialTrace run_ablation_variant(const OptimizerSpec& spec, BlackBox& problem, Objective& objective,
                                const InitialDesign& design)
{
    if (spec.kind != AlgorithmKind::transform_only && spec.kind != AlgorithmKind::annealing_only) {
        throw ConfigError("run_ablation_variant: spec kind must be transform_only or annealing_only");
    }
    check_design(spec, problem, design);
    const PairedTransform transform =
        spec.transform ? *spec.transform : PairedTransform::identity(problem.box().dim());
    return run_ucb_loop(spec, transform, problem, objective, design);
}

namespace {

Box region_box(const Vector& center, double length, const Vector& weights)
{
    const Vector half = 0.5 * length * weights;
    Vector lo = (center - half).cwiseMax(0.0);
    Vector hi = (center + half).cwiseMin(1.0);
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(hi[i] > lo[i])) {
            // Collapsed by floating point at the unit-box boundary.
            lo[i] = std::max(0.0, std::min(lo[i], 1.0 - 1e-12));
            hi[i] = std::min(1.0, lo[i] + 1e-12);
        }
    }
    return Box(lo, hi);
}

}  // namespace

TrialTrace run_turbo(const OptimizerSpec& spec, BlackBox& problem, Objective& objective, const InitialDesign& design)
{
    if (spec.kind != AlgorithmKind::turbo) throw ConfigError("run_turbo: spec kind mismatch");
    check_design(spec, problem, design);
    const Box& native = problem.box();
    const std::size_t dim = native.dim();
    const auto d = static_cast<Eigen::Index>(dim);

    TraceBuilder builder(spec, objective);
    TrialTrace& trace = builder.trace();
    std::vector<Vector> unit_points;
    std::vector<double> values;
    std::vector<std::size_t> local;  // indices evaluated since the last restart

    for (std::size_t i = 0; i < spec.n_init; ++i) {
        unit_points.push_back(native.to_unit(design.points[i]));
        values.push_back(builder.add(design.points[i], design_measurement(design, problem, i), kNaN));
        local.push_back(i);
    }

    UniformSampler restart_sampler(spec.seed);
    for (std::size_t i = 0; i < spec.n_init; ++i) restart_sampler.next(native);

    TrustRegionState region(spec.turbo, dim);
    std::mt19937_64 acq_rng(derive_seed(spec.seed, kStreamAcquisition));
    std::optional<KernelParams> warm;
    Vector weights = Vector::Ones(d);
    const double root_beta = std::sqrt(spec.schedule.beta(0));

    auto local_best = [&]() {
        std::size_t best = local.front();
        for (std::size_t idx : local) {
            if (values[idx] < values[best]) best = idx;
        }
        return best;
    };

    try {
        while (trace.rows.size() < spec.budget) {
            const std::size_t it = trace.rows.size();
            const std::size_t best = local_best();
            const Vector center = unit_points[best];

            // Local training set: restart points inside the current region,
            // topped up with the nearest ones when too few fall inside.
            const Box current = region_box(center, region.length(), weights);
            std::vector<std::size_t> train;
            for (std::size_t idx : local) {
                if (current.contains(unit_points[idx])) train.push_back(idx);
            }
            const std::size_t min_points = std::min(local.size(), spec.n_init);
            if (train.size() < min_points) {
                std::vector<std::size_t> by_distance = local;
                auto dist = [&](std::size_t idx) {
                    return ((unit_points[idx] - center).array() / weights.array()).abs().maxCoeff();
                };
                std::stable_sort(by_distance.begin(), by_distance.end(),
                                 [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
                by_distance.resize(min_points);
                train = by_distance;
            }
            Matrix X(static_cast<Eigen::Index>(train.size()), d);
            Vector y(static_cast<Eigen::Index>(train.size()));
            for (std::size_t r = 0; r < train.size(); ++r) {
                X.row(static_cast<Eigen::Index>(r)) = unit_points[train[r]].transpose();
                y[static_cast<Eigen::Index>(r)] = values[train[r]];
            }
            const GpSurrogate gp = GpSurrogate::fit(X, y, fit_settings(spec, it, warm));
            warm = gp.params();

            const Vector& ls = gp.params().lengthscales;
            const double geo = std::exp(ls.array().log().mean());
            weights = ls / geo;
            const Box candidate_box = region_box(center, region.length(), weights);

            auto acquisition = [&](const Matrix& U) {
                Vector mean, var;
                gp.predict(U, mean, var);
                return Vector(-mean.array() + root_beta * var.array().sqrt());
            };
            const Vector u = maximize_acquisition(acquisition, candidate_box, acq_rng, spec.acquisition);
            const Vector x = native.from_unit(u);
            const double incumbent = values[best];
            const double f = builder.add(x, problem.measure(x), spec.schedule.beta(0));
            unit_points.push_back(u);
            values.push_back(f);
            local.push_back(values.size() - 1);

            const auto event = region.record(region.is_improvement(f, incumbent));
            trace.region_events.push_back(event);
            trace.region_lengths.push_back(region.length());
            if (event == TrustRegionState::Event::restarted) {
                local.clear();
                weights = Vector::Ones(d);
                warm.reset();
                for (std::size_t i = 0; i < spec.n_init && trace.rows.size() < spec.budget; ++i) {
                    const Vector xr = restart_sampler.next(native);
                    unit_points.push_back(native.to_unit(xr));
                    values.push_back(builder.add(xr, problem.measure(xr), kNaN));
                    local.push_back(values.size() - 1);
                }
            }
        }
    } catch (const NumericalFailure& e) {
        builder.fail(e.what());
    }
    return builder.finish();
}

TrialTrace run_mobo(const OptimizerSpec& spec, BlackBox& problem, Objective& objective, const InitialDesign& design)
{
    if (spec.kind != AlgorithmKind::mobo) throw ConfigError("run_mobo: spec kind mismatch");
    check_design(spec, problem, design);
    const Box& native = problem.box();
    const auto d = static_cast<Eigen::Index>(native.dim());

    TraceBuilder builder(spec, objective);
    TrialTrace& trace = builder.trace();
    Matrix X(spec.budget, d);
    Vector err(spec.budget), neg_int(spec.budget);
    ParetoFront front;
    std::size_t n = 0;

    auto record = [&](const Vector& x, const Vector& u, const Measurement& m) {
        X.row(static_cast<Eigen::Index>(n)) = u.transpose();
        err[static_cast<Eigen::Index>(n)] = m.error_um;
        neg_int[static_cast<Eigen::Index>(n)] = -m.intensity_au;
        ++n;
        builder.add(x, m, kNaN);
        front.insert({m.error_um, -m.intensity_au});
        trace.fronts.push_back(front.points());
    };

    for (std::size_t i = 0; i < spec.n_init; ++i) {
        record(design.points[i], native.to_unit(design.points[i]), design_measurement(design, problem, i));
    }

    // Reference point: observed maximum plus 10% of the observed range.
    auto reference = [&](const Vector& v) {
        const double hi = v.maxCoeff();
        const double range = hi - v.minCoeff();
        const double floor = 1e-9 * std::max(1.0, std::abs(hi));
        return hi + 0.1 * std::max(range, floor);
    };

    std::mt19937_64 acq_rng(derive_seed(spec.seed, kStreamAcquisition));
    std::optional<KernelParams> warm_e, warm_i;
    const Box unit = Box::unit(native.dim());
    try {
        for (std::size_t it = spec.n_init; it < spec.budget; ++it) {
            const auto rows = static_cast<Eigen::Index>(n);
            const Objectives2 ref = {reference(err.head(rows)), reference(neg_int.head(rows))};
            const GpSurrogate gp_e = GpSurrogate::fit(X.topRows(rows), err.head(rows), fit_settings(spec, it, warm_e));
            FitSettings fi = fit_settings(spec, it, warm_i);
            fi.seed = derive_seed(fi.seed, 2);
            const GpSurrogate gp_i = GpSurrogate::fit(X.topRows(rows), neg_int.head(rows), fi);
            warm_e = gp_e.params();
            warm_i = gp_i.params();

            auto acquisition = [&](const Matrix& U) {
                Vector me, ve, mi, vi;
                gp_e.predict(U, me, ve);
                gp_i.predict(U, mi, vi);
                Vector out(U.rows());
                for (Eigen::Index r = 0; r < U.rows(); ++r) {
                    out[r] = ehvi_2d(front, ref, {me[r], mi[r]}, {std::sqrt(ve[r]), std::sqrt(vi[r])});
                }
                return out;
            };
            const Vector u = maximize_acquisition(acquisition, unit, acq_rng, spec.acquisition);
            const Vector x = native.from_unit(u);
            record(x, u, problem.measure(x));
        }
    } catch (const NumericalFailure& e) {
        builder.fail(e.what());
    }
    return builder.finish();
}

TrialTrace run_trial(const OptimizerSpec& spec, BlackBox& problem, Objective& objective, const InitialDesign& design)
{
    switch (spec.kind) {
    case AlgorithmKind::standard_bo:
        return run_standard_bo(spec, problem, objective, design);
    case AlgorithmKind::domain_guided:
        return run_domain_guided(spec, problem, objective, design);
    case AlgorithmKind::turbo:
        return run_turbo(spec, problem, objective, design);
    case AlgorithmKind::mobo:
        return run_mobo(spec, problem, objective, design);
    case AlgorithmKind::transform_only:
    case AlgorithmKind::annealing_only:
        return run_ablation_variant(spec, problem, objective, design);
    }
    throw InternalError("run_trial: unhandled algorithm kind");
}

}  // namespace dgbo
