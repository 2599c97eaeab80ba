#include "dgbo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

namespace dgbo {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double to_unit_open(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

// Standard normal deviate determined by (seed, t).
double hashed_normal(std::uint64_t seed, std::uint64_t t)
{
    const std::uint64_t h1 = splitmix64(seed ^ splitmix64(t));
    const std::uint64_t h2 = splitmix64(h1);
    const double u1 = to_unit_open(h1);
    const double u2 = to_unit_open(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

double pair_error_sq(const SimulatorConfig& cfg, std::size_t i, double dk_delay, double dk_ref)
{
    double diff = kInvSqrt2 * (dk_delay - dk_ref);
    const double common = kInvSqrt2 * (dk_delay + dk_ref);
    if (cfg.periodic_period > 0.0) {
        const double p = cfg.periodic_period;
        diff = (p / std::numbers::pi) * std::sin(std::numbers::pi * diff / p);
    }
    const double wd = cfg.diff_weights[static_cast<Eigen::Index>(i)] * diff;
    const double wc = cfg.common_weights[static_cast<Eigen::Index>(i)] * common;
    return wd * wd + wc * wc;
}

double noiseless_error(const SimulatorConfig& cfg, const Vector& k)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.pairs.size(); ++i) {
        const auto d = static_cast<Eigen::Index>(cfg.pairs[i].delay_index);
        const auto r = static_cast<Eigen::Index>(cfg.pairs[i].ref_index);
        sum += pair_error_sq(cfg, i, k[d] - cfg.theta_star[d], k[r] - cfg.theta_star[r]);
    }
    return std::sqrt(sum);
}

}  // namespace

DriftModel DriftModel::from_cadence(double drift_nm_per_min, double seconds_per_eval, double jitter_rms_um,
                                    std::uint64_t seed)
{
    DriftModel m;
    m.rate_um_per_eval = drift_nm_per_min * 1e-3 * seconds_per_eval / 60.0;
    m.jitter_rms_um = jitter_rms_um;
    m.seed = seed;
    m.validate();
    return m;
}

void DriftModel::validate() const
{
    if (!std::isfinite(rate_um_per_eval)) throw InvalidInput("drift: non-finite rate");
    if (!(jitter_rms_um >= 0.0) || !std::isfinite(jitter_rms_um)) {
        throw InvalidInput("drift: jitter_rms must be non-negative");
    }
}

double DriftModel::offset(std::uint64_t t) const
{
    return rate_um_per_eval * static_cast<double>(t) + jitter_rms_um * hashed_normal(seed, t);
}

SimulatorConfig SimulatorConfig::defaults()
{
    SimulatorConfig c;
    c.dim = 12;
    for (std::size_t i = 0; i < 6; ++i) c.pairs.push_back({2 * i, 2 * i + 1});
    c.box = Box::uniform(12, -100.0, 100.0);
    c.theta_star.resize(12);
    c.theta_star << 24.0, -18.0, -36.0, 12.0, 40.0, 30.0, -22.0, -44.0, 8.0, 28.0, -30.0, 16.0;
    c.gated_axes = {0, 2, 4, 6, 8, 10};
    c.darwin_widths = Vector::Constant(6, 2.0);
    c.gate_order = 8.0;
    c.diff_weights = Vector::Constant(6, 0.45);
    c.common_weights = Vector::Zero(6);
    c.peak_intensity = 1.0;
    c.bpe_target = 5.0;
    return c;
}

void SimulatorConfig::validate() const
{
    if (dim == 0) throw InvalidInput("simulator: dim must be positive");
    PairedTransform(dim, pairs);  // validates pairing
    box.validate();
    if (box.dim() != dim) throw DimensionError("simulator: box dimension does not match dim");
    require_dim(theta_star, dim, "simulator theta_star");
    for (std::size_t i = 0; i < dim; ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        if (!(theta_star[j] > box.lower[j] && theta_star[j] < box.upper[j])) {
            throw InvalidInput("simulator: theta_star[" + std::to_string(i) + "] must lie strictly inside the box");
        }
    }
    if (darwin_widths.size() != static_cast<Eigen::Index>(gated_axes.size())) {
        throw DimensionError("simulator: need one darwin width per gated axis");
    }
    std::vector<bool> seen(dim, false);
    for (std::size_t g = 0; g < gated_axes.size(); ++g) {
        if (gated_axes[g] >= dim) throw IndexOutOfRange("simulator: gated axis outside dimension");
        if (seen[gated_axes[g]]) throw InvalidInput("simulator: gated axis listed twice");
        seen[gated_axes[g]] = true;
        if (!(darwin_widths[static_cast<Eigen::Index>(g)] > 0.0)) {
            throw InvalidInput("simulator: darwin widths must be positive");
        }
    }
    if (!(gate_order > 0.0)) throw InvalidInput("simulator: gate order must be positive");
    require_dim(diff_weights, pairs.size(), "simulator diff_weights");
    require_dim(common_weights, pairs.size(), "simulator common_weights");
    if ((diff_weights.array() <= 0.0).any()) throw InvalidInput("simulator: diff weights must be positive");
    if ((common_weights.array() < 0.0).any()) throw InvalidInput("simulator: common weights must be non-negative");
    if (!(peak_intensity > 0.0)) throw InvalidInput("simulator: peak intensity must be positive");
    if (!(bpe_target > 0.0)) throw InvalidInput("simulator: bpe target must be positive");
    if (!(periodic_period >= 0.0)) throw InvalidInput("simulator: periodic period must be non-negative");
    if (noise) noise->validate();
}

double beam_position_error(const SimulatorConfig& cfg, const Vector& k, std::uint64_t t)
{
    require_dim(k, cfg.dim, "beam_position_error");
    const double e = noiseless_error(cfg, cfg.box.clip(k));
    return cfg.noise ? e + cfg.noise->offset(t) : e;
}

double gate_factor(const SimulatorConfig& cfg, std::size_t gate, double k_value)
{
    const auto axis = static_cast<Eigen::Index>(cfg.gated_axes.at(gate));
    const double u = (k_value - cfg.theta_star[axis]) / cfg.darwin_widths[static_cast<Eigen::Index>(gate)];
    return std::exp(-std::pow(std::abs(u), cfg.gate_order) * std::numbers::ln2);
}

double intensity(const SimulatorConfig& cfg, const Vector& k)
{
    require_dim(k, cfg.dim, "intensity");
    const Vector kc = cfg.box.clip(k);
    double value = cfg.peak_intensity;
    for (std::size_t g = 0; g < cfg.gated_axes.size(); ++g) {
        value *= gate_factor(cfg, g, kc[static_cast<Eigen::Index>(cfg.gated_axes[g])]);
    }
    return value;
}

Measurement evaluate(const SimulatorConfig& cfg, const Vector& k, std::uint64_t t)
{
    return {beam_position_error(cfg, k, t), intensity(cfg, k)};
}

double max_error_over_box(const SimulatorConfig& cfg)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < cfg.pairs.size(); ++i) {
        const auto d = static_cast<Eigen::Index>(cfg.pairs[i].delay_index);
        const auto r = static_cast<Eigen::Index>(cfg.pairs[i].ref_index);
        double best = 0.0;
        for (double kd : {cfg.box.lower[d], cfg.box.upper[d]}) {
            for (double kr : {cfg.box.lower[r], cfg.box.upper[r]}) {
                best = std::max(best, pair_error_sq(cfg, i, kd - cfg.theta_star[d], kr - cfg.theta_star[r]));
            }
        }
        sum += best;
    }
    return std::sqrt(sum);
}

std::vector<SliceNode> landscape_slice(const SimulatorConfig& cfg, std::size_t axis_a, std::size_t axis_b,
                                       std::size_t grid, const Vector& fixed)
{
    if (axis_a >= cfg.dim || axis_b >= cfg.dim) throw IndexOutOfRange("landscape: axis outside dimension");
    if (axis_a == axis_b) throw InvalidInput("landscape: axes must differ");
    if (grid < 2) throw InvalidInput("landscape: grid must be at least 2");
    require_dim(fixed, cfg.dim, "landscape fixed point");

    SimulatorConfig noiseless = cfg;
    noiseless.noise.reset();
    const auto ia = static_cast<Eigen::Index>(axis_a);
    const auto ib = static_cast<Eigen::Index>(axis_b);
    std::vector<SliceNode> nodes;
    nodes.reserve(grid * grid);
    Vector k = fixed;
    const double n = static_cast<double>(grid - 1);
    for (std::size_t i = 0; i < grid; ++i) {
        const double a = cfg.box.lower[ia] + (cfg.box.upper[ia] - cfg.box.lower[ia]) * static_cast<double>(i) / n;
        for (std::size_t j = 0; j < grid; ++j) {
            const double b = cfg.box.lower[ib] + (cfg.box.upper[ib] - cfg.box.lower[ib]) * static_cast<double>(j) / n;
            k[ia] = a;
            k[ib] = b;
            const Measurement m = evaluate(noiseless, k);
            nodes.push_back({a, b, m.error_um, m.intensity_au});
        }
    }
    return nodes;
}

void write_slice_csv(std::ostream& out, const std::vector<SliceNode>& nodes)
{
    out << "a,b,E_um,I_au\n";
    char line[160];
    for (const auto& n : nodes) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", n.a, n.b, n.error_um, n.intensity_au);
        out << line;
    }
}

Simulator::Simulator(SimulatorConfig cfg, std::uint64_t start_clock) : cfg_(std::move(cfg)), clock_(start_clock)
{
    cfg_.validate();
}

Measurement Simulator::measure(const Vector& k)
{
    require_dim(k, cfg_.dim, "simulator measure");
    if (!cfg_.box.contains(k)) ++out_of_box_;
    return evaluate(cfg_, k, clock_++);
}

}  // namespace dgbo
