#pragma once

#include <chainsim/scenario/study.hpp>

#include <filesystem>
#include <string>

namespace chainsim {

// Column layouts are versioned; bump on any change.
inline constexpr int kMinersCsvVersion = 1;
inline constexpr int kMempoolCsvVersion = 1;
inline constexpr int kMetricsCsvVersion = 1;
inline constexpr int kSummaryCsvVersion = 1;

std::string miners_csv(const RunReport& report);
std::string mempool_csv(const RunReport& report);
std::string metrics_csv(const RunReport& report);
std::string summary_csv(const StudyResult& study);
std::string summary_json(const StudyResult& study);
std::string manifest_json(const StudyResult& study);

/// Human-readable per-configuration table of the headline metrics.
std::string summary_table(const StudyResult& study);

/// Creates `dir` if needed and verifies it accepts files. Throws std::runtime_error.
void ensure_writable(const std::filesystem::path& dir);

/// Directory name of one run inside <out>/runs.
std::string run_directory_name(const StudyRun& run, std::uint64_t seed);

/// Writes every per-run CSV plus the study summary, manifest and JSON.
void write_study(const StudyResult& study, const std::filesystem::path& out);

} // namespace chainsim
