#include <chainsim/scenario/report.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace chainsim {

namespace {

std::string num(double v)
{
    if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15) {
        return fmt::format("{}", static_cast<long long>(v));
    }
    return fmt::format("{}", v);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_file(const std::filesystem::path& p, const std::string& content)
{
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    if (!f) throw std::runtime_error("failed writing " + p.string());
}

std::string config_tag(const Configuration& c)
{
    std::string tag;
    for (const auto& [k, v] : c.factor_values) tag += fmt::format("{}{}={}", tag.empty() ? "" : " ", k, v);
    return tag.empty() ? "-" : tag;
}

} // namespace

std::string miners_csv(const RunReport& r)
{
    std::string out = "node,label,hash_rate,hash_share,selfish,blocks_mined,blocks_main,reward_subsidy,reward_fees,"
                      "reward_total\n";
    for (const MinerReport& m : r.miners) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", m.node.value, csv_field(m.label), num(m.hash_rate),
                           num(m.hash_share), m.selfish ? 1 : 0, m.blocks_mined, m.blocks_main, m.reward_subsidy,
                           m.reward_fees, m.reward_subsidy + m.reward_fees);
    }
    return out;
}

std::string mempool_csv(const RunReport& r)
{
    std::string out = "time_s";
    for (const std::string& l : r.node_labels) out += "," + csv_field(l);
    out += "\n";
    for (std::size_t i = 0; i < r.sample_times.size(); ++i) {
        out += format_seconds(r.sample_times[i]);
        for (std::uint32_t v : r.mempool_samples[i]) out += fmt::format(",{}", v);
        out += "\n";
    }
    return out;
}

std::string metrics_csv(const RunReport& r)
{
    std::string out = "metric,value\n";
    out += fmt::format("seed,{}\n", r.seed);
    out += fmt::format("duration_s,{}\n", format_seconds(r.duration));
    for (const auto& [k, v] : r.metrics) out += fmt::format("{},{}\n", k, num(v));
    return out;
}

std::string summary_csv(const StudyResult& study)
{
    std::vector<std::string> factor_names;
    if (!study.configs.empty()) {
        for (const auto& [k, v] : study.configs.front().factor_values) factor_names.push_back(k);
    }
    std::string out = "configuration";
    for (const std::string& f : factor_names) out += "," + csv_field(f);
    out += ",metric,n,mean,sd,ci95_low,ci95_high\n";
    for (std::size_t ci = 0; ci < study.configs.size(); ++ci) {
        std::string head = fmt::format("{}", ci);
        for (const auto& [k, v] : study.configs[ci].factor_values) head += "," + csv_field(v);
        for (const auto& [metric, s] : study.summaries[ci].metrics) {
            out += fmt::format("{},{},{},{},{},{},{}\n", head, csv_field(metric), s.n, num(s.mean),
                               s.n >= 2 ? num(s.sd) : "", s.ci_low ? num(*s.ci_low) : "",
                               s.ci_high ? num(*s.ci_high) : "");
        }
    }
    return out;
}

std::string summary_json(const StudyResult& study)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["study"] = study.name;
    j["seed"] = study.seed;
    j["repetitions"] = study.repetitions;
    j["duration_s"] = study.duration.seconds();
    j["wall_seconds"] = study.wall_seconds;
    ordered_json configs = ordered_json::array();
    for (std::size_t ci = 0; ci < study.configs.size(); ++ci) {
        ordered_json c;
        c["index"] = ci;
        ordered_json factors = ordered_json::object();
        for (const auto& [k, v] : study.configs[ci].factor_values) factors[k] = v;
        c["factors"] = factors;
        ordered_json metrics = ordered_json::object();
        for (const auto& [metric, s] : study.summaries[ci].metrics) {
            ordered_json m;
            m["n"] = s.n;
            m["mean"] = s.mean;
            m["sd"] = s.n >= 2 ? ordered_json(s.sd) : ordered_json(nullptr);
            m["ci95"] = s.ci_low ? ordered_json::array({*s.ci_low, *s.ci_high}) : ordered_json(nullptr);
            metrics[metric] = m;
        }
        c["metrics"] = metrics;
        ordered_json runs = ordered_json::array();
        for (const RunReport* r : study.reports(ci)) {
            runs.push_back({{"seed", r->seed}, {"wall_seconds", r->wall_seconds}, {"events", r->events}});
        }
        c["runs"] = runs;
        configs.push_back(c);
    }
    j["configurations"] = configs;
    return j.dump(2) + "\n";
}

std::string manifest_json(const StudyResult& study)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["tool"] = "chainsim";
    j["schemas"] = {{"miners.csv", kMinersCsvVersion},
                    {"mempool.csv", kMempoolCsvVersion},
                    {"metrics.csv", kMetricsCsvVersion},
                    {"summary.csv", kSummaryCsvVersion}};
    j["study"] = study.name;
    j["seed"] = study.seed;
    j["repetitions"] = study.repetitions;
    j["duration_s"] = study.duration.seconds();
    ordered_json runs = ordered_json::array();
    for (const StudyRun& r : study.runs) {
        runs.push_back({{"configuration", r.config_index},
                        {"seed", r.report.seed},
                        {"directory", "runs/" + run_directory_name(r, r.report.seed)}});
    }
    j["runs"] = runs;
    return j.dump(2) + "\n";
}

std::string summary_table(const StudyResult& study)
{
    static const char* const headline[] = {"main_blocks",   "stale_blocks",         "reorgs",
                                           "tx_confirmed",  "throughput_tps",       "attacker_reward_share",
                                           "attack_blocks", "attacker_block_share"};
    std::string out = fmt::format("study {} | seed {} | {} repetition(s) | {} simulated | {:.1f} s wall\n", study.name,
                                  study.seed, study.repetitions, format_duration(study.duration), study.wall_seconds);
    out += fmt::format("{:<28} {:<24} {:>14} {:>12} {:>28}\n", "configuration", "metric", "mean", "sd", "95% CI");
    for (std::size_t ci = 0; ci < study.configs.size(); ++ci) {
        const std::string tag = config_tag(study.configs[ci]);
        for (const char* name : headline) {
            const SampleStats* s = study.summaries[ci].find(name);
            if (!s) continue;
            const std::string ci95 = s->ci_low ? fmt::format("[{:.4g}, {:.4g}]", *s->ci_low, *s->ci_high) : "-";
            out += fmt::format("{:<28} {:<24} {:>14.6g} {:>12.4g} {:>28}\n", tag, name, s->mean, s->sd, ci95);
        }
    }
    return out;
}

void ensure_writable(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
    const auto probe = dir / ".write-check";
    {
        std::ofstream f(probe);
        if (!f) throw std::runtime_error(fmt::format("output directory {} is not writable", dir.string()));
    }
    std::filesystem::remove(probe, ec);
}

std::string run_directory_name(const StudyRun& run, std::uint64_t seed)
{
    return fmt::format("c{}_s{}", run.config_index, seed);
}

void write_study(const StudyResult& study, const std::filesystem::path& out)
{
    ensure_writable(out);
    for (const StudyRun& r : study.runs) {
        const auto dir = out / "runs" / run_directory_name(r, r.report.seed);
        std::filesystem::create_directories(dir);
        write_file(dir / "miners.csv", miners_csv(r.report));
        write_file(dir / "mempool.csv", mempool_csv(r.report));
        write_file(dir / "metrics.csv", metrics_csv(r.report));
    }
    write_file(out / "summary.csv", summary_csv(study));
    write_file(out / "summary.json", summary_json(study));
    write_file(out / "manifest.json", manifest_json(study));
}

} // namespace chainsim
