#pragma once

#include "dgbo/objective.hpp"
#include "dgbo/optimizers.hpp"
#include "dgbo/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dgbo {

/// One algorithm of a campaign. `spec.seed` is replaced per trial.
struct AlgorithmEntry {
    /// Name used in trace file names and the `algorithm` CSV column.
    std::string label;
    OptimizerSpec spec;
};

struct CampaignConfig {
    SimulatorConfig simulator = SimulatorConfig::defaults();
    std::vector<AlgorithmEntry> algorithms;
    std::size_t n_trials = 25;
    std::size_t budget = 150;
    std::size_t n_init = 4;
    std::uint64_t master_seed = 0;
    NormalizationBounds normalization;
    std::filesystem::path output_dir = "results";
    /// Worker threads; 0 selects the available hardware parallelism.
    std::size_t jobs = 0;

    /// Throws ConfigError.
    void validate() const;
};

/// Default error/intensity bounds for a simulator: [0, max error over the
/// box] and [0, peak intensity].
NormalizationBounds default_normalization(const SimulatorConfig& sim);

/// Entries for the given kinds with their default schedules, the simulator's
/// pairing as transform, and the campaign's budget and n_init.
std::vector<AlgorithmEntry> default_algorithms(const std::vector<AlgorithmKind>& kinds, const SimulatorConfig& sim,
                                               std::size_t n_init, std::size_t budget);

/// Builds a campaign from a parsed document. Unknown keys, wrong types and
/// missing required fields raise ConfigError naming the offending field by
/// its dotted path (e.g. `simulator.box`).
CampaignConfig parse_config(const nlohmann::json& doc);

/// Parses `text`; syntax errors raise ConfigError with line and column.
CampaignConfig parse_config_text(const std::string& text);

/// Reads and parses a config file. Unreadable files raise IoError.
CampaignConfig load_config(const std::filesystem::path& path);

/// Fully resolved config (every default filled in). parse_config of the
/// result reproduces an equivalent campaign.
nlohmann::json to_json(const CampaignConfig& cfg);

}  // namespace dgbo
