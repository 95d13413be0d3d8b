#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qso/distributions.hpp"
#include "qso/samplers.hpp"

namespace qso {

inline constexpr std::uint64_t kDefaultMasterSeed = 20240917;

std::string version();

struct GridSpec {
    double delta = 0.05;
    int k_grid = 200;
};

/// Everything a run depends on. Subcommand-specific settings live in
/// `options` under documented keys (see README).
struct ExperimentConfig {
    std::string command;
    DistributionSpec seed = DistributionSpec::exponential(1.0);
    DistributionSpec kernel = DistributionSpec::normal(0.0, 0.5);
    int n = 1;
    std::size_t population_size = 10000;
    std::size_t count = 10000;
    GridSpec grid;
    TruncationBudget budget;
    std::uint64_t master_seed = kDefaultMasterSeed;
    std::uint64_t stream_id = 0;
    std::string output_dir;
    unsigned threads = 0;  // 0: all hardware threads
    bool guard_override = false;
    nlohmann::json options = nlohmann::json::object();
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Validates every field; unknown keys are rejected. Accepts either a
/// config object or a run manifest (whose "config" member is used).
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Reference defaults for the figure reproduction: K = 10^4, kernel
/// Normal(0, 0.5), seeds Exponential(1) and Normal(0, 1), n in {1, 100, 500},
/// alpha = 0.05, delta = 0.01, natural-log depth.
ExperimentConfig figure_defaults();

/// Runs the figure reproduction, writing 18 histogram CSVs and
/// figures_summary.json into cfg.output_dir; returns the summary.
nlohmann::json replicate_figures(const ExperimentConfig& cfg);

/// Entry point of the `qso` executable; args excludes the program name.
/// Returns 0 on success, 2 on validation errors, 3 on numeric failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qso
