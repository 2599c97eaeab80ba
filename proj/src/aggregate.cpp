#include "dgbo/aggregate.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dgbo {

std::string to_string(RunningMetric metric)
{
    switch (metric) {
    case RunningMetric::min_error:
        return "run_min_E";
    case RunningMetric::max_intensity:
        return "run_max_I";
    case RunningMetric::min_f:
        return "run_min_f";
    }
    return "unknown";
}

const std::vector<RunningMetric>& all_running_metrics()
{
    static const std::vector<RunningMetric> metrics = {RunningMetric::min_error, RunningMetric::max_intensity,
                                                       RunningMetric::min_f};
    return metrics;
}

double quantile(std::vector<double> values, double p)
{
    if (values.empty()) throw InvalidInput("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("quantile level outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

double column(const TraceRow& row, RunningMetric metric)
{
    switch (metric) {
    case RunningMetric::min_error:
        return row.run_min_error;
    case RunningMetric::max_intensity:
        return row.run_max_intensity;
    case RunningMetric::min_f:
        return row.run_min_f;
    }
    return 0.0;
}

}  // namespace

AggregateCurve aggregate(const std::vector<TrialTrace>& traces, RunningMetric metric)
{
    AggregateCurve curve;
    curve.metric = metric;
    std::vector<const TrialTrace*> ok;
    for (const auto& t : traces) {
        if (t.ok()) {
            ok.push_back(&t);
        } else {
            ++curve.n_failed;
        }
    }
    if (ok.empty()) throw EmptyAggregate("aggregate: no successful trials among " + std::to_string(traces.size()));
    const std::size_t length = ok.front()->rows.size();
    for (const TrialTrace* t : ok) {
        if (t->rows.size() != length) throw InvalidData("aggregate: successful traces differ in length");
    }
    curve.n_trials = ok.size();
    std::vector<double> sample(ok.size());
    for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t j = 0; j < ok.size(); ++j) sample[j] = column(ok[j]->rows[i], metric);
        curve.median.push_back(quantile(sample, 0.5));
        curve.q25.push_back(quantile(sample, 0.25));
        curve.q75.push_back(quantile(sample, 0.75));
    }
    return curve;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateCurve>& curves)
{
    out << "iter,metric,median,q25,q75,n_trials\n";
    for (const auto& c : curves) {
        const std::string name = to_string(c.metric);
        for (std::size_t i = 0; i < c.median.size(); ++i) {
            out << i << ',' << name << ',' << csv::number(c.median[i]) << ',' << csv::number(c.q25[i]) << ','
                << csv::number(c.q75[i]) << ',' << c.n_trials << '\n';
        }
    }
}

}  // namespace dgbo
