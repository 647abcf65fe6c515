#pragma once

#include <chainsim/scenario/run.hpp>
#include <chainsim/scenario/stats.hpp>

#include <functional>
#include <stdexcept>

namespace chainsim {

/// A run failed; the whole study is discarded.
class StudyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StudyOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> repetitions;
    std::optional<SimTime> until;
    std::size_t parallel = 1;
    std::function<void(const std::string&)> progress; // called serially
};

struct StudyRun {
    std::size_t config_index = 0;
    std::uint32_t repetition = 0;
    RunReport report;
};

struct ConfigurationSummary {
    std::vector<std::pair<std::string, SampleStats>> metrics;
    const SampleStats* find(std::string_view name) const;
};

struct StudyResult {
    std::string name;
    std::uint64_t seed = 0;
    std::uint32_t repetitions = 0;
    SimTime duration;
    std::vector<Configuration> configs;
    std::vector<StudyRun> runs; // configuration-major, then repetition
    std::vector<ConfigurationSummary> summaries;
    double wall_seconds = 0.0;

    std::vector<const RunReport*> reports(std::size_t config_index) const;
};

/// Expands the factor product and runs every configuration for seeds
/// seed + 0 ... seed + (repetitions - 1).
StudyResult run_study(std::string_view text, std::string_view origin, const StudyOptions& options = {});

/// Per-configuration statistics: every scalar metric, plus per-miner metrics
/// named "miner.<label>.<metric>".
ConfigurationSummary summarize_runs(std::span<const RunReport* const> runs);

} // namespace chainsim
