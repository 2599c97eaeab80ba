#include "dgbo/campaign.hpp"
#include "dgbo/config.hpp"
#include "dgbo/simulator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 0;
    bool quiet = false;
};

dgbo::CampaignConfig load(const CommonOptions& opts)
{
    dgbo::CampaignConfig cfg = dgbo::load_config(opts.config_path);
    if (opts.seed) cfg.master_seed = *opts.seed;
    if (const char* dir = std::getenv("DGBO_OUTPUT_DIR"); dir && *dir) cfg.output_dir = dir;
    if (opts.jobs > 0) cfg.jobs = opts.jobs;
    return cfg;
}

void run_and_write(const dgbo::CampaignConfig& cfg, bool quiet)
{
    const std::size_t total = cfg.n_trials * cfg.algorithms.size();
    std::size_t done = 0;
    dgbo::ProgressFn progress;
    if (!quiet) {
        progress = [&](const dgbo::AlgorithmEntry& entry, const dgbo::TrialTrace& trace) {
            ++done;
            std::cerr << '[' << done << '/' << total << "] " << entry.label << " trial " << trace.trial_id;
            if (trace.ok()) {
                const auto& last = trace.rows.back();
                std::cerr << " min E " << last.run_min_error << " um, max I " << last.run_max_intensity << '\n';
            } else {
                std::cerr << " FAILED: " << trace.failure << '\n';
            }
        };
    }
    const dgbo::CampaignResult result = dgbo::run_campaign(cfg, cfg.jobs, progress);
    dgbo::write_campaign(result, cfg.output_dir);
    for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
        if (const std::size_t n = result.failures(a); n > 0) {
            std::cerr << "warning: " << cfg.algorithms[a].label << ": " << n << " of " << cfg.n_trials
                      << " trials failed\n";
        }
    }
    if (!quiet) std::cerr << "wrote " << cfg.output_dir.string() << '\n';
}

std::vector<std::size_t> parse_axes(const std::string& text)
{
    std::vector<std::size_t> axes;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw dgbo::ConfigError("--axes: expected two indices like 0,1");
        axes.push_back(v);
    }
    if (axes.size() != 2) throw dgbo::ConfigError("--axes: expected exactly two indices");
    return axes;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bayesian optimization campaigns on a split-and-delay alignment testbed"};
    app.set_version_flag("--version", DGBO_VERSION);
    app.require_subcommand(1);

    CommonOptions opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opts.config_path, "Campaign config (JSON)")->required();
        sub->add_option("--seed", opts.seed, "Override campaign.master_seed");
        sub->add_option("--jobs", opts.jobs, "Worker threads (default: hardware parallelism)");
        sub->add_flag("-q,--quiet", opts.quiet, "No progress output");
    };

    CLI::App* run = app.add_subcommand("run", "Run every configured algorithm over all trials");
    add_common(run);

    CLI::App* ablate = app.add_subcommand("ablate", "Run domain_guided, transform_only and annealing_only");
    add_common(ablate);

    CLI::App* validate = app.add_subcommand("validate", "Check a config without running anything");
    validate->add_option("config", opts.config_path, "Campaign config (JSON)")->required();

    std::string axes_text = "0,1";
    std::size_t grid = 101;
    std::string out_path;
    CLI::App* landscape = app.add_subcommand("landscape", "Export a noiseless 2-D slice of the landscape as CSV");
    landscape->add_option("config", opts.config_path, "Campaign config (JSON)")->required();
    landscape->add_option("--axes", axes_text, "Slice axes a,b")->capture_default_str();
    landscape->add_option("--grid", grid, "Nodes per axis")->capture_default_str();
    landscape->add_option("-o,--out", out_path, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*validate) {
            const dgbo::CampaignConfig cfg = load(opts);
            std::cout << "ok: " << cfg.algorithms.size() << " algorithms, " << cfg.n_trials << " trials, budget "
                      << cfg.budget << ", dim " << cfg.simulator.dim << '\n';
        } else if (*run) {
            run_and_write(load(opts), opts.quiet);
        } else if (*ablate) {
            dgbo::CampaignConfig cfg = load(opts);
            const std::vector<dgbo::AlgorithmKind> kinds = {dgbo::AlgorithmKind::domain_guided,
                                                            dgbo::AlgorithmKind::transform_only,
                                                            dgbo::AlgorithmKind::annealing_only};
            std::vector<dgbo::AlgorithmEntry> entries;
            for (dgbo::AlgorithmKind k : kinds) {
                const auto it = std::find_if(cfg.algorithms.begin(), cfg.algorithms.end(),
                                             [&](const dgbo::AlgorithmEntry& e) { return e.spec.kind == k; });
                if (it != cfg.algorithms.end()) {
                    entries.push_back(*it);
                } else {
                    entries.push_back(dgbo::default_algorithms({k}, cfg.simulator, cfg.n_init, cfg.budget).front());
                }
            }
            cfg.algorithms = std::move(entries);
            cfg.validate();
            run_and_write(cfg, opts.quiet);
        } else if (*landscape) {
            const dgbo::CampaignConfig cfg = load(opts);
            const auto axes = parse_axes(axes_text);
            const auto nodes =
                dgbo::landscape_slice(cfg.simulator, axes[0], axes[1], grid, cfg.simulator.theta_star);
            if (out_path.empty()) {
                dgbo::write_slice_csv(std::cout, nodes);
            } else {
                std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
                if (!out) throw dgbo::IoError("cannot open '" + out_path + "' for writing");
                dgbo::write_slice_csv(out, nodes);
                out.close();
                if (!out) throw dgbo::IoError("failed writing '" + out_path + "'");
            }
        }
    } catch (const dgbo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
