#include "dgbo/campaign.hpp"

#include "dgbo/aggregate.hpp"

#include "csv.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

namespace dgbo {

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) { return derive_seed(master_seed, trial); }

SimulatorConfig trial_simulator(const SimulatorConfig& sim, std::size_t trial)
{
    SimulatorConfig out = sim;
    if (out.noise) out.noise->seed = derive_seed(sim.noise->seed, trial);
    return out;
}

std::size_t CampaignResult::failures(std::size_t algorithm) const
{
    std::size_t n = 0;
    for (const auto& t : traces.at(algorithm)) n += t.ok() ? 0 : 1;
    return n;
}

CampaignResult run_campaign(const CampaignConfig& cfg, std::size_t jobs, const ProgressFn& progress)
{
    cfg.validate();
    CampaignResult result;
    result.config = cfg;

    // Shared initial samples, measured on the trial's own clock 0..n_init-1.
    for (std::size_t t = 0; t < cfg.n_trials; ++t) {
        const std::uint64_t seed = trial_seed(cfg.master_seed, t);
        result.seeds.push_back(seed);
        Simulator sim(trial_simulator(cfg.simulator, t));
        InitialDesign design = draw_initial_design(sim.box(), cfg.n_init, seed);
        measure_design(design, sim);
        result.designs.push_back(std::move(design));
    }

    const std::size_t n_alg = cfg.algorithms.size();
    result.traces.assign(n_alg, std::vector<TrialTrace>(cfg.n_trials));
    const std::size_t units = n_alg * cfg.n_trials;

    auto run_unit = [&](std::size_t unit) {
        // Trial-major order so early trials of every algorithm finish first.
        const std::size_t t = unit / n_alg;
        const std::size_t a = unit % n_alg;
        const AlgorithmEntry& entry = cfg.algorithms[a];
        OptimizerSpec spec = entry.spec;
        spec.seed = result.seeds[t];
        Simulator sim(trial_simulator(cfg.simulator, t), cfg.n_init);
        Objective objective(cfg.normalization);
        TrialTrace trace;
        try {
            trace = run_trial(spec, sim, objective, result.designs[t]);
        } catch (const std::exception& e) {
            trace = TrialTrace{};
            trace.algorithm = spec.kind;
            trace.seed = spec.seed;
            trace.status = TrialStatus::failed;
            trace.failure = e.what();
        }
        trace.trial_id = t;
        result.traces[a][t] = std::move(trace);
    };

    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, units);
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    auto worker = [&] {
        for (std::size_t unit = next++; unit < units; unit = next++) {
            run_unit(unit);
            if (progress) {
                const std::lock_guard lock(progress_mutex);
                progress(cfg.algorithms[unit % n_alg], result.traces[unit % n_alg][unit / n_alg]);
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
    }
    return result;
}

std::string trace_file_name(const std::string& label, std::size_t trial)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "_trial%02zu.csv", trial);
    return label + buf;
}

std::string aggregate_file_name(const std::string& label) { return "aggregate_" + label + ".csv"; }

void write_trace_csv(std::ostream& out, const TrialTrace& trace, const std::string& label)
{
    std::size_t dim = 0;
    if (!trace.rows.empty()) dim = static_cast<std::size_t>(trace.rows.front().point.size());
    out << "iter,algorithm,trial,seed";
    for (std::size_t i = 0; i < dim; ++i) out << ",x" << i;
    out << ",E_um,I_au,f,run_min_E,run_max_I,run_min_f,beta,status\n";
    const std::string name = csv::field(label);
    const char* status = trace.ok() ? "ok" : "failed";
    for (const auto& r : trace.rows) {
        out << r.iter << ',' << name << ',' << trace.trial_id << ',' << trace.seed;
        for (Eigen::Index i = 0; i < r.point.size(); ++i) out << ',' << csv::number(r.point[i]);
        out << ',' << csv::number(r.error_um) << ',' << csv::number(r.intensity_au) << ',' << csv::number(r.f) << ','
            << csv::number(r.run_min_error) << ',' << csv::number(r.run_max_intensity) << ','
            << csv::number(r.run_min_f) << ',' << csv::number(r.beta) << ',' << status << '\n';
    }
}

nlohmann::json campaign_manifest(const CampaignResult& result)
{
    nlohmann::json config = to_json(result.config);
    config["campaign"].erase("output_dir");
    config["campaign"].erase("jobs");

    nlohmann::json algorithms = nlohmann::json::array();
    for (std::size_t a = 0; a < result.traces.size(); ++a) {
        nlohmann::json failed = nlohmann::json::array();
        std::size_t clamp_e = 0, clamp_i = 0;
        for (const auto& t : result.traces[a]) {
            clamp_e += t.clamps.error;
            clamp_i += t.clamps.intensity;
            if (!t.ok()) failed.push_back({{"trial", t.trial_id}, {"reason", t.failure}});
        }
        algorithms.push_back({{"label", result.config.algorithms[a].label},
                              {"kind", to_string(result.config.algorithms[a].spec.kind)},
                              {"trials", result.traces[a].size()},
                              {"failures", failed.size()},
                              {"failed_trials", failed},
                              {"clamped_error", clamp_e},
                              {"clamped_intensity", clamp_i}});
    }
    return {{"code_version", DGBO_VERSION},
            {"trial_seeds", result.seeds},
            {"config", std::move(config)},
            {"algorithms", std::move(algorithms)}};
}

namespace {

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path)
{
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

void write_campaign(const CampaignResult& result, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir / "traces", ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

    for (std::size_t a = 0; a < result.traces.size(); ++a) {
        const std::string& label = result.config.algorithms[a].label;
        for (const auto& trace : result.traces[a]) {
            const auto path = dir / "traces" / trace_file_name(label, trace.trial_id);
            std::ofstream out = open_output(path);
            write_trace_csv(out, trace, label);
            close_output(out, path);
        }
        std::vector<AggregateCurve> curves;
        try {
            for (RunningMetric m : all_running_metrics()) curves.push_back(aggregate(result.traces[a], m));
        } catch (const EmptyAggregate&) {
            continue;
        }
        const auto path = dir / aggregate_file_name(label);
        std::ofstream out = open_output(path);
        write_aggregate_csv(out, curves);
        close_output(out, path);
    }

    const auto path = dir / "manifest.json";
    std::ofstream out = open_output(path);
    out << campaign_manifest(result).dump(2) << '\n';
    close_output(out, path);
}

}  // namespace dgbo
