#pragma once

#include "dgbo/optimizers.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dgbo {

enum class RunningMetric { min_error, max_intensity, min_f };

/// CSV name of the metric: run_min_E, run_max_I or run_min_f.
std::string to_string(RunningMetric metric);
const std::vector<RunningMetric>& all_running_metrics();

/// Linear-interpolation quantile of `values` (sorted internally), p in [0, 1].
/// Throws InvalidInput on an empty sample or p outside [0, 1].
double quantile(std::vector<double> values, double p);

struct AggregateCurve {
    RunningMetric metric = RunningMetric::min_error;
    std::vector<double> median;
    std::vector<double> q25;
    std::vector<double> q75;
    std::size_t n_trials = 0;
    std::size_t n_failed = 0;
};

/// Per-iteration median and quartiles of a running column over the
/// successful traces. Failed traces are skipped and counted. Throws
/// EmptyAggregate when no trace succeeded and InvalidData when the
/// successful traces differ in length.
AggregateCurve aggregate(const std::vector<TrialTrace>& traces, RunningMetric metric);

/// Writes `iter,metric,median,q25,q75,n_trials` rows for each curve in turn.
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateCurve>& curves);

}  // namespace dgbo
