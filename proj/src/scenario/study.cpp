#include <chainsim/scenario/study.hpp>

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>

namespace chainsim {

const SampleStats* ConfigurationSummary::find(std::string_view name) const
{
    for (const auto& [k, v] : metrics) {
        if (k == name) return &v;
    }
    return nullptr;
}

std::vector<const RunReport*> StudyResult::reports(std::size_t config_index) const
{
    std::vector<const RunReport*> out;
    for (const StudyRun& r : runs) {
        if (r.config_index == config_index) out.push_back(&r.report);
    }
    return out;
}

ConfigurationSummary summarize_runs(std::span<const RunReport* const> runs)
{
    ConfigurationSummary s;
    if (runs.empty()) return s;
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> values;
    const auto add = [&](const std::string& k, double v) {
        auto [it, fresh] = values.try_emplace(k);
        if (fresh) order.push_back(k);
        it->second.push_back(v);
    };
    for (const RunReport* r : runs) {
        for (const auto& [k, v] : r->metrics) add(k, v);
        const double main_blocks = r->metric("main_blocks");
        for (const MinerReport& m : r->miners) {
            const std::string p = "miner." + m.label + ".";
            add(p + "blocks_main", static_cast<double>(m.blocks_main));
            add(p + "blocks_mined", static_cast<double>(m.blocks_mined));
            add(p + "block_share", main_blocks > 0 ? static_cast<double>(m.blocks_main) / main_blocks : 0.0);
            add(p + "reward_total", static_cast<double>(m.reward_subsidy + m.reward_fees));
        }
    }
    for (const std::string& k : order) s.metrics.emplace_back(k, summarize(values[k]));
    return s;
}

StudyResult run_study(std::string_view text, std::string_view origin, const StudyOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    StudyResult result;
    result.configs = expand_configurations(text, origin);
    const ScenarioConfig& base = result.configs.front().config;
    result.name = base.name;
    result.seed = options.seed.value_or(base.seed);
    result.repetitions = options.repetitions.value_or(base.repetitions);
    result.duration = options.until.value_or(base.duration);
    if (result.repetitions == 0) throw StudyError("repetitions must be at least 1");

    const std::size_t total = result.configs.size() * result.repetitions;
    std::vector<std::optional<RunReport>> reports(total);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex lock;
    std::string failure;
    std::size_t done = 0;

    const auto worker = [&] {
        while (!failed.load()) {
            const std::size_t job = next.fetch_add(1);
            if (job >= total) return;
            const std::size_t ci = job / result.repetitions;
            const auto rep = static_cast<std::uint32_t>(job % result.repetitions);
            const std::uint64_t seed = result.seed + rep;
            try {
                RunOptions ro;
                ro.until = result.duration;
                reports[job] = run_simulation(result.configs[ci].config, seed, ro);
            } catch (const std::exception& e) {
                std::lock_guard g(lock);
                if (!failed.exchange(true)) {
                    failure = fmt::format("configuration {} seed {} failed: {}", ci, seed, e.what());
                }
                return;
            }
            if (options.progress) {
                std::lock_guard g(lock);
                ++done;
                options.progress(fmt::format("[{}/{}] configuration {} seed {} done in {:.1f} s", done, total, ci,
                                             seed, reports[job]->wall_seconds));
            }
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(options.parallel, total));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed) throw StudyError(failure);

    for (std::size_t job = 0; job < total; ++job) {
        result.runs.push_back(StudyRun{job / result.repetitions, static_cast<std::uint32_t>(job % result.repetitions),
                                       std::move(*reports[job])});
    }
    for (std::size_t ci = 0; ci < result.configs.size(); ++ci) {
        const std::vector<const RunReport*> rs = result.reports(ci);
        result.summaries.push_back(summarize_runs(rs));
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace chainsim
