#pragma once

#include "dgbo/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dgbo {

/// Seed of trial `trial`, shared by every algorithm of that trial.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

/// Simulator of one trial: the campaign simulator with the drift seed mixed
/// with the trial index so trials see independent noise.
SimulatorConfig trial_simulator(const SimulatorConfig& sim, std::size_t trial);

struct CampaignResult {
    CampaignConfig config;
    std::vector<std::uint64_t> seeds;
    std::vector<InitialDesign> designs;
    /// traces[algorithm][trial], in config order.
    std::vector<std::vector<TrialTrace>> traces;

    std::size_t failures(std::size_t algorithm) const;
};

/// Called after each finished (algorithm, trial) unit, from worker threads
/// but never concurrently.
using ProgressFn = std::function<void(const AlgorithmEntry&, const TrialTrace&)>;

/// Runs every (algorithm, trial) unit on a pool of `jobs` threads (0 picks
/// the hardware parallelism). The initial design of each trial is drawn and
/// measured once and replayed to every algorithm. Results do not depend on
/// `jobs`.
CampaignResult run_campaign(const CampaignConfig& cfg, std::size_t jobs = 0, const ProgressFn& progress = {});

std::string trace_file_name(const std::string& label, std::size_t trial);
std::string aggregate_file_name(const std::string& label);

void write_trace_csv(std::ostream& out, const TrialTrace& trace, const std::string& label);

/// Config echo (without output_dir and jobs), code version, and per-algorithm
/// failure and clamp counts.
nlohmann::json campaign_manifest(const CampaignResult& result);

/// Writes traces/<label>_trialNN.csv, aggregate_<label>.csv and
/// manifest.json under `dir`. Algorithms with no successful trial get no
/// aggregate file. Throws IoError when a file cannot be written.
void write_campaign(const CampaignResult& result, const std::filesystem::path& dir);

}  // namespace dgbo
