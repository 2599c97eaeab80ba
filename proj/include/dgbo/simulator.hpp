#pragma once

#include "dgbo/problem.hpp"
#include "dgbo/transform.hpp"
#include "dgbo/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace dgbo {

/// Linear position drift plus Gaussian jitter on the error reading.
/// The jitter at evaluation t is a pure function of (seed, t).
struct DriftModel {
    double rate_um_per_eval = 0.05;
    double jitter_rms_um = 0.108;
    std::uint64_t seed = 0;

    /// Rate from a drift speed (nm/min) and a measurement cadence (s/eval).
    static DriftModel from_cadence(double drift_nm_per_min, double seconds_per_eval, double jitter_rms_um,
                                   std::uint64_t seed);

    void validate() const;
    double offset(std::uint64_t t) const;
};

/// Analytic split-and-delay testbed.
///
/// Canonical axis order (documentation only): each pair (2i, 2i+1) couples a
/// delay-branch knob with its reference partner, e.g. (t1.th1, t4.th1),
/// (t1.th2, t4.th2), (t2.th, t3.th), (t1.chi1, t4.chi1), (t1.chi2, t4.chi2),
/// (t2.chi, t3.chi). All angles in µrad.
struct SimulatorConfig {
    std::size_t dim = 12;
    std::vector<KnobPair> pairs;
    Box box;
    Vector theta_star;
    /// Axes carrying a Bragg acceptance gate, and their half-widths.
    std::vector<std::size_t> gated_axes;
    Vector darwin_widths;
    /// Super-Gaussian order of the gate profile exp(-|u|^order ln 2).
    double gate_order = 8.0;
    /// Per-pair error gains on the differential and common modes (µm/µrad).
    Vector diff_weights;
    Vector common_weights;
    double peak_intensity = 1.0;
    double bpe_target = 5.0;
    /// Period (µrad) of an optional periodic differential-mode response that
    /// adds parallel low-error bands; 0 disables it.
    double periodic_period = 0.0;
    std::optional<DriftModel> noise;

    static SimulatorConfig defaults();
    void validate() const;
};

/// Position error at native setting k and evaluation index t (the latter
/// only matters with drift enabled). Noisy readings are not clamped at zero.
double beam_position_error(const SimulatorConfig& cfg, const Vector& k, std::uint64_t t = 0);
/// Product of per-axis flat-top gates; peak_intensity at theta_star.
double intensity(const SimulatorConfig& cfg, const Vector& k);
/// Gate factor of one gated axis (index into cfg.gated_axes).
double gate_factor(const SimulatorConfig& cfg, std::size_t gate, double k_value);
Measurement evaluate(const SimulatorConfig& cfg, const Vector& k, std::uint64_t t = 0);

/// Largest noiseless error over the corners of the box. Each pair's
/// contribution is a convex function of its two knobs, so the maximum over
/// the box is the sum of per-pair corner maxima.
double max_error_over_box(const SimulatorConfig& cfg);

struct SliceNode {
    double a = 0.0;
    double b = 0.0;
    double error_um = 0.0;
    double intensity_au = 0.0;
};

/// Noiseless grid over axes (axis_a, axis_b) spanning the box, remaining
/// coordinates taken from `fixed`. Rows ordered with axis_a outermost.
std::vector<SliceNode> landscape_slice(const SimulatorConfig& cfg, std::size_t axis_a, std::size_t axis_b,
                                       std::size_t grid, const Vector& fixed);
/// CSV with header `a,b,E_um,I_au`.
void write_slice_csv(std::ostream& out, const std::vector<SliceNode>& nodes);

/// Stateful simulator owning the evaluation clock. One per trial.
class Simulator : public BlackBox {
public:
    explicit Simulator(SimulatorConfig cfg, std::uint64_t start_clock = 0);

    const SimulatorConfig& config() const { return cfg_; }
    const Box& box() const override { return cfg_.box; }

    /// Evaluates at the current clock and advances it. Points outside the
    /// box are clamped and counted.
    Measurement measure(const Vector& k) override;

    std::uint64_t clock() const { return clock_; }
    std::size_t out_of_box_count() const { return out_of_box_; }

private:
    SimulatorConfig cfg_;
    std::uint64_t clock_ = 0;
    std::size_t out_of_box_ = 0;
};

}  // namespace dgbo
