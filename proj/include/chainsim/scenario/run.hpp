#pragma once

#include <chainsim/scenario/config.hpp>

#include <string>
#include <utility>
#include <vector>

namespace chainsim {

struct MinerReport {
    NodeId node;
    std::string label;
    double hash_rate = 0.0;
    double hash_share = 0.0;
    bool selfish = false;
    std::uint64_t blocks_mined = 0; // every block this miner produced
    std::uint64_t blocks_main = 0;  // of those, blocks in the final chain
    Amount reward_subsidy = 0;      // final chain only
    Amount reward_fees = 0;
};

/// Everything one run produces. All fields except wall-clock time are a
/// deterministic function of (config, seed).
struct RunReport {
    std::uint64_t seed = 0;
    SimTime duration;
    std::vector<MinerReport> miners;
    std::vector<std::pair<std::string, double>> metrics; // scalar metrics in a fixed order
    std::vector<std::string> node_labels;
    std::vector<SimTime> sample_times;
    std::vector<std::vector<std::uint32_t>> mempool_samples; // [sample][node]
    std::uint64_t events = 0;
    double wall_seconds = 0.0;

    double metric(std::string_view name) const;
};

struct RunOptions {
    /// Overrides the configured duration when set.
    std::optional<SimTime> until;
};

/// Builds the network for `config`, runs it to the end time and collects metrics.
RunReport run_simulation(const ScenarioConfig& config, std::uint64_t seed, const RunOptions& options = {});

/// Manager factory honouring each node's `selfish` flag.
ManagerFactory default_manager_factory();

/// Collects the report from a finished network. `final_chain` is the main
/// chain of the lowest-id honest node.
RunReport collect_report(const Network& net, std::uint64_t seed, SimTime duration);

} // namespace chainsim
