// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
//
//   acceptance <work_dir> [criterion ...]
//
// Campaign criteria (7-9) run the real command-line tool on the default
// config and read back its CSV output.

#include "dgbo/acquisition.hpp"
#include "dgbo/campaign.hpp"
#include "dgbo/config.hpp"
#include "dgbo/objective.hpp"
#include "dgbo/optimizers.hpp"
#include "dgbo/simulator.hpp"
#include "dgbo/surrogate.hpp"
#include "dgbo/transform.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace dgbo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep = ',')
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

int shell(const std::string& cmd)
{
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------- 1

Outcome transform_correctness()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    double worst_orth = 0.0, worst_round = 0.0, worst_iso = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 16)(rng);
        std::vector<std::size_t> axes(dim);
        std::iota(axes.begin(), axes.end(), 0);
        std::shuffle(axes.begin(), axes.end(), rng);
        const std::size_t n_pairs = std::uniform_int_distribution<std::size_t>(0, dim / 2)(rng);
        std::vector<KnobPair> pairs;
        for (std::size_t i = 0; i < n_pairs; ++i) pairs.push_back({axes[2 * i], axes[2 * i + 1]});
        const PairedTransform t(dim, pairs);

        const Matrix& m = t.matrix();
        const auto n = static_cast<Eigen::Index>(dim);
        worst_orth = std::max(worst_orth, (m.transpose() * m - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());

        Vector x(n), y(n);
        for (auto& v : x) v = u(rng);
        for (auto& v : y) v = u(rng);
        const double scale = std::max({1.0, x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()});
        worst_round = std::max(worst_round, (t.inverse(t.forward(x)) - x).cwiseAbs().maxCoeff() / scale);
        worst_iso = std::max(worst_iso,
                             std::abs((t.forward(x) - t.forward(y)).norm() - (x - y).norm()) / (x - y).norm());
    }
    const double secs = seconds_since(t0);
    const bool pass = worst_orth <= 1e-12 && worst_round <= 1e-12 && worst_iso <= 1e-12 && secs < 1.0;
    return {pass, "1000 transforms: max |M^T M - I| " + fmt("%.2e", worst_orth) + ", round trip " +
                      fmt("%.2e", worst_round) + ", isometry " + fmt("%.2e", worst_iso) + " (tol 1e-12), " +
                      fmt("%.3f", secs) + " s (limit 1 s)"};
}

// ---------------------------------------------------------------- 2

Outcome gp_oracle()
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    auto inputs = [&](Eigen::Index n, Eigen::Index d) {
        Matrix X(n, d);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) X(i, j) = unit(rng);
        }
        return X;
    };
    auto params = [&](Eigen::Index d) {
        KernelParams p;
        p.lengthscales.resize(d);
        for (auto& l : p.lengthscales) l = std::exp(std::log(0.1) + unit(rng) * std::log(20.0));
        p.signal_variance = std::exp(std::log(0.3) + unit(rng) * std::log(10.0));
        p.noise_variance = std::exp(std::log(1e-4) + unit(rng) * std::log(1e3));
        return p;
    };

    double worst_post = 0.0, worst_grad = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(2, 10)(rng);
        const Eigen::Index d = std::uniform_int_distribution<Eigen::Index>(1, 3)(rng);
        const Matrix X = inputs(n, d);
        Vector y(n);
        for (auto& v : y) v = 2.0 * z(rng) - 1.0;
        const KernelParams p = params(d);

        const GpSurrogate gp = GpSurrogate::condition(X, y, p);
        const Matrix Q = inputs(5, d);
        for (Eigen::Index q = 0; q < Q.rows(); ++q) {
            const Vector x = Q.row(q).transpose();
            const Prediction got = gp.predict(x);
            const oracle::Posterior want = oracle::dense_gp(X, y, p, x, gp.jitter());
            worst_post = std::max({worst_post, std::abs(got.mean - want.mean),
                                   std::abs(got.variance - std::max(0.0, want.variance))});
        }

        const Vector ys = (y.array() - gp.target_mean()) / gp.target_scale();
        const Vector theta = p.to_log();
        const LogLikelihood l = log_marginal_likelihood(X, ys, p);
        const Vector fd = oracle::central_difference(
            [&](const Vector& t) { return log_marginal_likelihood(X, ys, KernelParams::from_log(t)).value; }, theta);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            worst_grad = std::max(worst_grad, std::abs(l.gradient[i] - fd[i]) / std::max(1e-3, std::abs(fd[i])));
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = worst_post <= 1e-8 && worst_grad <= 1e-4 && secs < 30.0;
    return {pass, "100 datasets: max posterior deviation " + fmt("%.2e", worst_post) + " (tol 1e-8), max LML " +
                      "gradient rel. error " + fmt("%.2e", worst_grad) + " (tol 1e-4), " + fmt("%.2f", secs) +
                      " s (limit 30 s)"};
}

// ---------------------------------------------------------------- 3

Outcome ehvi_exactness()
{
    // The sample standard error is only meaningful when enough samples land
    // in the improvement region, so instances where the oracle sees fewer
    // than kMinHits improving draws are skipped (and counted) until 50
    // resolvable instances have been checked.
    constexpr std::size_t kMinHits = 1000;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_z = 0.0;
    int outside = 0, checked = 0, skipped = 0;
    for (int rep = 0; checked < 50 && rep < 1000; ++rep) {
        const int k = std::uniform_int_distribution<int>(1, 8)(rng);
        std::vector<Objectives2> raw;
        for (int i = 0; i < k; ++i) raw.push_back({u(rng), u(rng)});
        const ParetoFront front(raw);
        const Objectives2 ref = {1.0 + 0.5 * u(rng), 1.0 + 0.5 * u(rng)};
        const Objectives2 mean = {1.2 * u(rng), 1.2 * u(rng)};
        const Objectives2 sd = {0.02 + 0.4 * u(rng), 0.02 + 0.4 * u(rng)};
        const auto mc = oracle::monte_carlo_ehvi(front.points(), ref, mean, sd, 1'000'000, 1000 + rep);
        if (mc.nonzero < kMinHits) {
            ++skipped;
            continue;
        }
        ++checked;
        const double dev = std::abs(ehvi_2d(front, ref, mean, sd) - mc.mean);
        worst_z = std::max(worst_z, dev / mc.standard_error);
        if (dev > 3.0 * mc.standard_error) ++outside;
    }
    const double secs = seconds_since(t0);
    const bool pass = checked == 50 && outside == 0 && secs < 120.0;
    return {pass, std::to_string(checked) + " instances, 1e6 samples each: " + std::to_string(outside) +
                      " outside 3 SE, worst " + fmt("%.2f", worst_z) + " SE (" + std::to_string(skipped) +
                      " unresolvable instances skipped), " + fmt("%.1f", secs) + " s (limit 120 s)"};
}

// ---------------------------------------------------------------- 4

Outcome scalarization()
{
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double lo = 1.0, hi = -1.0;
    for (int i = 0; i < 100000; ++i) {
        const double f = scalarize(u(rng), u(rng));
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    const double opt = scalarize(0.0, 1.0);
    const bool pass = lo >= -1.0 && hi <= 1.0 && opt == -1.0;
    return {pass, "1e5 samples in [" + fmt("%.6f", lo) + ", " + fmt("%.6f", hi) + "], f(0, 1) = " + fmt("%.17g", opt)};
}

// ---------------------------------------------------------------- 5

struct Slice {
    std::vector<double> a_values, b_values;
    // value[ib][ia]
    std::vector<std::vector<double>> error, intensity;
};

Slice read_slice(const fs::path& file)
{
    const auto rows = lines_of(slurp(file));
    if (rows.empty() || rows[0] != "a,b,E_um,I_au") throw InvalidData("unexpected slice header");
    std::map<double, std::map<double, std::pair<double, double>>> grid;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = split(rows[i]);
        grid[std::stod(f[1])][std::stod(f[0])] = {std::stod(f[2]), std::stod(f[3])};
    }
    Slice s;
    for (const auto& [b, row] : grid) {
        s.b_values.push_back(b);
        s.error.emplace_back();
        s.intensity.emplace_back();
        for (const auto& [a, v] : row) {
            if (s.b_values.size() == 1) s.a_values.push_back(a);
            s.error.back().push_back(v.first);
            s.intensity.back().push_back(v.second);
        }
    }
    return s;
}

Outcome landscape_geometry(const fs::path& work)
{
    const fs::path config = fs::path(DGBO_CONFIG_DIR) / "default.json";
    const fs::path pair_csv = work / "slice_pair.csv";
    const fs::path gate_csv = work / "slice_gates.csv";
    const std::string cli = DGBO_CLI_PATH;
    const int grid = 401;
    if (shell(cli + " landscape " + config.string() + " --axes 0,1 --grid " + std::to_string(grid) + " -o " +
              pair_csv.string()) != 0 ||
        shell(cli + " landscape " + config.string() + " --axes 0,2 --grid " + std::to_string(grid) + " -o " +
              gate_csv.string()) != 0) {
        return {false, "landscape subcommand failed"};
    }

    // Argmin locus of the error over a pair slice: for each b, the a that
    // minimizes E. Rows whose minimum sits on the box edge are dropped.
    const Slice pair = read_slice(pair_csv);
    std::vector<double> xs, ys;
    for (std::size_t ib = 0; ib < pair.b_values.size(); ++ib) {
        const auto& row = pair.error[ib];
        const auto ia = static_cast<std::size_t>(std::min_element(row.begin(), row.end()) - row.begin());
        if (ia == 0 || ia + 1 == row.size()) continue;
        xs.push_back(pair.b_values[ib]);
        ys.push_back(pair.a_values[ia]);
    }
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    const bool slope_ok = xs.size() >= 10 && std::abs(std::abs(slope) - 1.0) <= 1e-6;

    // Above-half-max region of the intensity over two gated axes.
    const Slice gates = read_slice(gate_csv);
    double peak = 0.0;
    for (const auto& row : gates.intensity) {
        for (double v : row) peak = std::max(peak, v);
    }
    const std::size_t nb = gates.b_values.size(), na = gates.a_values.size();
    std::vector<std::vector<int>> label(nb, std::vector<int>(na, 0));
    std::size_t above = 0;
    int regions = 0;
    for (std::size_t i = 0; i < nb; ++i) {
        for (std::size_t j = 0; j < na; ++j) {
            if (gates.intensity[i][j] <= 0.5 * peak || label[i][j] != 0) continue;
            ++regions;
            std::vector<std::pair<std::size_t, std::size_t>> stack = {{i, j}};
            label[i][j] = regions;
            while (!stack.empty()) {
                const auto [r, c] = stack.back();
                stack.pop_back();
                ++above;
                const std::pair<long, long> steps[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                for (const auto& [dr, dc] : steps) {
                    const long rr = static_cast<long>(r) + dr, cc = static_cast<long>(c) + dc;
                    if (rr < 0 || cc < 0 || rr >= static_cast<long>(nb) || cc >= static_cast<long>(na)) continue;
                    if (label[rr][cc] != 0 || gates.intensity[rr][cc] <= 0.5 * peak) continue;
                    label[rr][cc] = regions;
                    stack.push_back({static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)});
                }
            }
        }
    }
    const double fraction = static_cast<double>(above) / static_cast<double>(nb * na);
    const bool needle_ok = regions == 1 && fraction < 1e-3;
    return {slope_ok && needle_ok, "pair (0,1) argmin slope " + fmt("%.12f", slope) + " over " +
                                       std::to_string(xs.size()) + " rows (tol 1e-6); gates (0,2): " +
                                       std::to_string(regions) + " region(s) above half max covering " +
                                       fmt("%.3e", fraction) + " of the grid (limit 1e-3)"};
}

// ---------------------------------------------------------------- 6

// Independent statement of the trust-region rules.
struct RegionOracle {
    double length, init, lo, hi;
    int succ_tol, fail_tol, succ = 0, fail = 0;

    TrustRegionState::Event step(bool ok)
    {
        using E = TrustRegionState::Event;
        succ = ok ? succ + 1 : 0;
        fail = ok ? 0 : fail + 1;
        if (succ >= succ_tol) {
            succ = 0;
            length = std::min(hi, 2.0 * length);
            return E::expanded;
        }
        if (fail >= fail_tol) {
            fail = 0;
            if (0.5 * length < lo) {
                length = init;
                return E::restarted;
            }
            length *= 0.5;
            return E::shrunk;
        }
        return E::none;
    }
};

Outcome turbo_state_machine()
{
    std::size_t sequences = 0, mismatches = 0;
    std::map<TrustRegionState::Event, std::size_t> seen;
    for (std::size_t dim : {1, 2, 3, 12}) {
        TurboSettings s;
        TrustRegionState probe(s, dim);
        for (int len = 1; len <= 16; ++len) {
            for (long mask = 0; mask < (1L << len); ++mask) {
                ++sequences;
                TrustRegionState r(s, dim);
                RegionOracle o{s.length_init, s.length_init, s.length_min, s.length_max, s.success_tolerance,
                               probe.failure_tolerance()};
                bool ok = probe.failure_tolerance() == static_cast<int>(dim);
                for (int i = 0; i < len && ok; ++i) {
                    const bool success = (mask >> i) & 1;
                    const auto got = r.record(success);
                    const auto want = o.step(success);
                    ++seen[got];
                    ok = got == want && r.length() == o.length && r.success_count() == o.succ &&
                         r.failure_count() == o.fail;
                }
                if (!ok) ++mismatches;
            }
        }
    }
    const bool all_events = seen.count(TrustRegionState::Event::expanded) &&
                            seen.count(TrustRegionState::Event::shrunk) &&
                            seen.count(TrustRegionState::Event::restarted);
    return {mismatches == 0 && all_events,
            std::to_string(sequences) + " sequences (length <= 16, dim 1/2/3/12): " + std::to_string(mismatches) +
                " mismatches; expansions " + std::to_string(seen[TrustRegionState::Event::expanded]) + ", halvings " +
                std::to_string(seen[TrustRegionState::Event::shrunk]) + ", restarts " +
                std::to_string(seen[TrustRegionState::Event::restarted])};
}

// ---------------------------------------------------------------- 7-9

struct CampaignRun {
    std::uint64_t seed = 0;
    fs::path dir;
    int exit_code = -1;
    double seconds = 0.0;
    // medians at the final evaluation, by label and metric
    std::map<std::string, std::map<std::string, double>> final_median;
};

const std::vector<std::string> kLabels = {"domain_guided", "standard_bo", "turbo",
                                          "mobo",          "transform_only", "annealing_only"};

CampaignRun run_default_campaign(const fs::path& work, std::uint64_t seed, std::size_t budget)
{
    CampaignRun r;
    r.seed = seed;
    r.dir = work / ("campaign_" + std::to_string(seed));
    fs::remove_all(r.dir);
    const fs::path config = fs::path(DGBO_CONFIG_DIR) / "default.json";
    const auto t0 = Clock::now();
    r.exit_code = shell("DGBO_OUTPUT_DIR=" + r.dir.string() + " " + DGBO_CLI_PATH + " run " + config.string() +
                        " --seed " + std::to_string(seed) + " -q");
    r.seconds = seconds_since(t0);
    if (r.exit_code != 0) return r;
    for (const auto& label : kLabels) {
        for (const auto& row : lines_of(slurp(r.dir / aggregate_file_name(label)))) {
            const auto f = split(row);
            if (f[0] == std::to_string(budget - 1)) r.final_median[label][f[1]] = std::stod(f[2]);
        }
    }
    return r;
}

Outcome protocol_fidelity(const fs::path& work, const CampaignRun& run, const CampaignConfig& cfg)
{
    if (run.exit_code != 0) return {false, "campaign exited with " + std::to_string(run.exit_code)};
    std::vector<std::string> problems;

    // Layout: 25 x 6 traces of 150 rows, one aggregate per variant.
    std::size_t trace_files = 0;
    for (const auto& e : fs::directory_iterator(run.dir / "traces")) trace_files += e.is_regular_file() ? 1 : 0;
    if (trace_files != cfg.n_trials * kLabels.size()) problems.push_back("trace file count");
    for (const auto& label : kLabels) {
        if (!fs::exists(run.dir / aggregate_file_name(label))) problems.push_back("missing aggregate " + label);
        for (std::size_t t = 0; t < cfg.n_trials; ++t) {
            const auto rows = lines_of(slurp(run.dir / "traces" / trace_file_name(label, t)));
            if (rows.size() != cfg.budget + 1) problems.push_back(trace_file_name(label, t) + " row count");
            for (std::size_t i = 1; i < rows.size(); ++i) {
                if (split(rows[i]).back() != "ok") {
                    problems.push_back(trace_file_name(label, t) + " failed");
                    break;
                }
            }
        }
    }

    // Shared initialization: the first n_init rows agree in every column but
    // the algorithm label.
    std::size_t init_mismatch = 0;
    for (std::size_t t = 0; t < cfg.n_trials; ++t) {
        const auto ref = lines_of(slurp(run.dir / "traces" / trace_file_name(kLabels[0], t)));
        for (const auto& label : kLabels) {
            const auto rows = lines_of(slurp(run.dir / "traces" / trace_file_name(label, t)));
            for (std::size_t i = 1; i <= cfg.n_init && i < rows.size(); ++i) {
                auto a = split(rows[i]), b = split(ref[i]);
                a.erase(a.begin() + 1);
                b.erase(b.begin() + 1);
                if (a != b) ++init_mismatch;
            }
        }
    }
    if (init_mismatch) problems.push_back(std::to_string(init_mismatch) + " shared-initialization mismatches");

    // Determinism: a two-trial rerun with a different thread count must
    // reproduce the first two trials byte for byte.
    nlohmann::json doc = nlohmann::json::parse(slurp(fs::path(DGBO_CONFIG_DIR) / "default.json"));
    doc["campaign"]["n_trials"] = 2;
    const fs::path sub_config = work / "determinism.json";
    std::ofstream(sub_config) << doc.dump(2);
    const fs::path sub_dir = work / "determinism";
    fs::remove_all(sub_dir);
    const int code = shell("DGBO_OUTPUT_DIR=" + sub_dir.string() + " " + DGBO_CLI_PATH + " run " +
                           sub_config.string() + " --seed " + std::to_string(run.seed) + " --jobs 3 -q");
    std::size_t diffs = 0;
    if (code != 0) {
        problems.push_back("determinism rerun failed");
    } else {
        for (const auto& label : kLabels) {
            for (std::size_t t = 0; t < 2; ++t) {
                const std::string name = trace_file_name(label, t);
                if (slurp(sub_dir / "traces" / name) != slurp(run.dir / "traces" / name)) ++diffs;
            }
        }
    }
    if (diffs) problems.push_back(std::to_string(diffs) + " trace files differ on rerun");

    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
    if (!(run.seconds < 3600.0)) problems.push_back("wall time over 60 min");

    std::string detail = std::to_string(cfg.n_trials) + " trials x " + std::to_string(cfg.budget) + " evals x " +
                         std::to_string(kLabels.size()) + " variants, " + std::to_string(cfg.n_init) +
                         " shared initial samples; wall time " + fmt("%.1f", run.seconds / 60.0) + " min on " +
                         std::to_string(cores) + " core(s) (limit 60 min on 4 cores)";
    for (const auto& p : problems) detail += "; " + p;
    return {problems.empty(), detail};
}

std::string medians_line(const CampaignRun& r, const std::string& metric)
{
    std::string s = "seed " + std::to_string(r.seed) + ":";
    for (const auto& label : kLabels) s += " " + label + "=" + fmt("%.4g", r.final_median.at(label).at(metric));
    return s;
}

Outcome bpe_ordering(const std::vector<CampaignRun>& runs, double target)
{
    int holds = 0;
    std::string detail;
    for (const auto& r : runs) {
        if (r.exit_code != 0) {
            detail += " seed " + std::to_string(r.seed) + " failed to run;";
            continue;
        }
        const auto& m = r.final_median;
        const double dg = m.at("domain_guided").at("run_min_E");
        const bool ok = dg < target && dg < m.at("turbo").at("run_min_E") &&
                        dg < m.at("standard_bo").at("run_min_E") && dg < m.at("mobo").at("run_min_E");
        holds += ok ? 1 : 0;
        detail += " [" + medians_line(r, "run_min_E") + (ok ? " holds]" : " violated]");
    }
    return {holds >= 2, "ordering holds on " + std::to_string(holds) + "/" + std::to_string(runs.size()) +
                            " seeds (need 2), target " + fmt("%g", target) + " um;" + detail};
}

Outcome intensity_ordering(const std::vector<CampaignRun>& runs, double target)
{
    int holds = 0;
    std::string detail;
    for (const auto& r : runs) {
        if (r.exit_code != 0) {
            detail += " seed " + std::to_string(r.seed) + " failed to run;";
            continue;
        }
        const auto& m = r.final_median;
        const double dg = m.at("domain_guided").at("run_max_I");
        bool ok = true;
        for (const char* other : {"transform_only", "annealing_only", "standard_bo", "turbo", "mobo"}) {
            ok = ok && dg > m.at(other).at("run_max_I");
        }
        const bool bpe_ok =
            m.at("transform_only").at("run_min_E") <= target && m.at("annealing_only").at("run_min_E") > target;
        holds += (ok && bpe_ok) ? 1 : 0;
        detail += " [" + medians_line(r, "run_max_I") + "; intensity order " + (ok ? "holds" : "violated") +
                  ", transform_only/annealing_only BPE clause " + (bpe_ok ? "holds" : "violated") + "]";
    }
    return {holds >= 2, "ordering holds on " + std::to_string(holds) + "/" + std::to_string(runs.size()) +
                            " seeds (need 2);" + detail};
}

// ---------------------------------------------------------------- 10

Outcome degeneration(const CampaignConfig& cfg)
{
    const auto find = [&](AlgorithmKind k) {
        for (const auto& a : cfg.algorithms) {
            if (a.spec.kind == k) return a;
        }
        return default_algorithms({k}, cfg.simulator, cfg.n_init, cfg.budget).front();
    };
    const AlgorithmEntry dg = find(AlgorithmKind::domain_guided);
    const AlgorithmEntry bo = find(AlgorithmKind::standard_bo);
    const std::size_t trials = 3;
    std::size_t identical = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t seed = trial_seed(cfg.master_seed, t);
        const SimulatorConfig sim = trial_simulator(cfg.simulator, t);
        Simulator first(sim);
        InitialDesign design = draw_initial_design(sim.box, cfg.n_init, seed);
        measure_design(design, first);

        auto run = [&](OptimizerSpec spec) {
            spec.seed = seed;
            Simulator s(sim, cfg.n_init);
            Objective obj(cfg.normalization);
            TrialTrace tr = run_trial(spec, s, obj, design);
            tr.trial_id = t;
            std::ostringstream out;
            write_trace_csv(out, tr, "variant");
            return out.str();
        };
        OptimizerSpec degenerate = dg.spec;
        degenerate.transform = PairedTransform::identity(sim.dim);
        degenerate.schedule = AnnealingSchedule::constant(1.0);
        const std::string a = run(degenerate);
        const std::string b = run(bo.spec);
        identical += (a == b && lines_of(a).size() == cfg.budget + 1) ? 1 : 0;
    }
    return {identical == trials, std::to_string(identical) + "/" + std::to_string(trials) +
                                     " full-budget trials byte-identical to standard_bo"};
}

// ---------------------------------------------------------------- 11

Outcome drift_model()
{
    SimulatorConfig cfg = SimulatorConfig::defaults();
    cfg.noise = DriftModel{};
    cfg.noise->seed = 1111;
    const double jitter = cfg.noise->jitter_rms_um;
    SimulatorConfig clean = cfg;
    clean.noise.reset();

    Simulator sim(cfg);
    std::mt19937_64 rng(1111);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t n = 1000;
    std::vector<double> t(n), r(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vector k(12);
        for (auto& v : k) v = u(rng);
        k = cfg.box.from_unit(k);
        t[i] = static_cast<double>(sim.clock());
        r[i] = sim.measure(k).error_um - beam_position_error(clean, k);
    }
    // Least-squares line removed, RMS of what remains.
    const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
    const double mr = std::accumulate(r.begin(), r.end(), 0.0) / n;
    double stt = 0.0, str = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        stt += (t[i] - mt) * (t[i] - mt);
        str += (t[i] - mt) * (r[i] - mr);
    }
    const double slope = str / stt;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = r[i] - mr - slope * (t[i] - mt);
        ss += e * e;
    }
    const double rms = std::sqrt(ss / n);
    const bool pass = std::abs(rms - jitter) <= 0.1 * jitter;
    return {pass, "detrended residual RMS " + fmt("%.4f", rms) + " um vs configured " + fmt("%.3f", jitter) +
                      " um over 1000 evaluations (tol 10%), fitted drift " + fmt("%.4f", slope) + " um/eval"};
}

}  // namespace

int main(int argc, char** argv)
{
    if (argc < 2) {
        std::cerr << "usage: acceptance <work_dir> [criterion ...]\n";
        return 2;
    }
    const fs::path work = fs::absolute(argv[1]);
    fs::create_directories(work);
    std::set<int> wanted;
    for (int i = 2; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    const auto want = [&](int c) { return wanted.empty() || wanted.count(c) > 0; };

    const CampaignConfig cfg = load_config(fs::path(DGBO_CONFIG_DIR) / "default.json");
    std::map<int, std::pair<std::string, Outcome>> results;
    const auto record = [&](int id, const std::string& name, const std::function<Outcome()>& check) {
        if (!want(id)) return;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        results[id] = {name, o};
        std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail
                  << std::endl;
    };

    record(1, "transform correctness", transform_correctness);
    record(2, "GP oracle equivalence", gp_oracle);
    record(3, "EHVI exactness", ehvi_exactness);
    record(4, "scalarization contract", scalarization);
    record(5, "landscape geometry", [&] { return landscape_geometry(work); });
    record(6, "TuRBO state machine", turbo_state_machine);

    std::vector<CampaignRun> runs;
    if (want(7) || want(8) || want(9)) {
        for (std::uint64_t seed : {cfg.master_seed, cfg.master_seed + 1, cfg.master_seed + 2}) {
            runs.push_back(run_default_campaign(work, seed, cfg.budget));
            std::cout << "  campaign seed " << seed << ": exit " << runs.back().exit_code << ", "
                      << fmt("%.1f", runs.back().seconds / 60.0) << " min" << std::endl;
        }
    }
    record(7, "protocol fidelity", [&] { return protocol_fidelity(work, runs.at(0), cfg); });
    record(8, "BPE ordering", [&] { return bpe_ordering(runs, cfg.simulator.bpe_target); });
    record(9, "intensity ordering", [&] { return intensity_ordering(runs, cfg.simulator.bpe_target); });
    record(10, "degeneration", [&] { return degeneration(cfg); });
    record(11, "drift model", drift_model);

    std::size_t failed = 0;
    for (const auto& [id, r] : results) failed += r.second.pass ? 0 : 1;
    std::cout << (failed == 0 ? "ALL PASS" : std::to_string(failed) + " criterion/criteria FAILED") << " ("
              << results.size() << " evaluated)" << std::endl;
    return failed == 0 ? 0 : 1;
}
