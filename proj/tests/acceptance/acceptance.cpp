// Acceptance gates. Usage: chainsim_acceptance GROUP [--unit PATH] [--cli PATH] [--work DIR]
// Groups: honest (1, 2), selfish (3, 4), retarget (5), properties (6), determinism (7), scale (8).

#include <chainsim/chain/difficulty.hpp>
#include <chainsim/scenario/presets.hpp>
#include <chainsim/scenario/report.hpp>
#include <chainsim/scenario/study.hpp>

#include "support/selfish_oracle.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <fcntl.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace chainsim;

namespace {

int failures = 0;

void verdict(int criterion, bool pass, const std::string& detail)
{
    if (!pass) ++failures;
    fmt::print("criterion {}: {} {}\n", criterion, pass ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
}

void note(const std::string& text)
{
    fmt::print("  {}\n", text);
    std::fflush(stdout);
}

std::string preset_text(std::string_view name)
{
    const Preset* p = find_preset(name);
    if (!p) throw std::runtime_error(fmt::format("no preset {}", name));
    return std::string(p->text);
}

bool covers(const SampleStats& s, double x)
{
    return s.ci_low && s.ci_high && *s.ci_low <= x && x <= *s.ci_high;
}

std::string ci(const SampleStats& s)
{
    if (!s.ci_low) return fmt::format("{:.4g} (n={})", s.mean, s.n);
    return fmt::format("{:.4g} [{:.4g}, {:.4g}]", s.mean, *s.ci_low, *s.ci_high);
}

const SampleStats& stat(const ConfigurationSummary& s, const std::string& name)
{
    const SampleStats* p = s.find(name);
    if (!p) throw std::runtime_error("missing metric " + name);
    return *p;
}

StudyResult study(std::string_view preset)
{
    StudyOptions opt;
    opt.progress = [](const std::string& line) { fmt::print(stderr, "{}\n", line); };
    return run_study(preset_text(preset), fmt::format("preset:{}", preset), opt);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Fork, exec and wait; `quiet` discards the child's stdout. Returns the exit status, or -1 if it crashed.
int run_command(const std::vector<std::string>& args, bool quiet = false)
{
    std::fflush(stdout);
    const pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
        std::vector<char*> argv;
        for (const std::string& a : args) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        if (quiet) dup2(open("/dev/null", O_WRONLY), STDOUT_FILENO);
        execv(argv[0], argv.data());
        _exit(127);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void honest()
{
    const StudyResult r = study("honest-62");
    const ConfigurationSummary& s = r.summaries.front();
    const SampleStats& blocks = stat(s, "main_blocks");

    double slowest = 0.0;
    for (const StudyRun& run : r.runs) slowest = std::max(slowest, run.report.wall_seconds);
    const double rel = std::abs(blocks.mean - 425.57) / 425.57;
    verdict(1, covers(blocks, 432.0) && rel <= 0.03 && slowest < 100.0,
            fmt::format("main blocks {} over {} seeds; 432 in CI: {}; {:.2f}% from 425.57; slowest run {:.1f} s "
                        "(limit 100 s), study {:.0f} s",
                        ci(blocks), blocks.n, covers(blocks, 432.0) ? "yes" : "no", rel * 100, slowest,
                        r.wall_seconds));

    const RunReport& first = r.runs.front().report;
    bool all = true;
    std::vector<std::pair<double, std::string>> by_blocks, by_reward;
    for (const MinerReport& m : first.miners) {
        const SampleStats& b = stat(s, "miner." + m.label + ".blocks_main");
        const SampleStats& rw = stat(s, "miner." + m.label + ".reward_total");
        const double expected = m.hash_share * blocks.mean;
        const bool ok = covers(b, expected);
        all = all && ok;
        note(fmt::format("{:<10} share {:.3f} expected {:8.2f} blocks {} {}", m.label, m.hash_share, expected, ci(b),
                         ok ? "ok" : "MISS"));
        by_blocks.emplace_back(b.mean, m.label);
        by_reward.emplace_back(rw.mean, m.label);
    }
    std::sort(by_blocks.begin(), by_blocks.end());
    std::sort(by_reward.begin(), by_reward.end());
    bool same_rank = true;
    for (std::size_t i = 0; i < by_blocks.size(); ++i) same_rank = same_rank && by_blocks[i].second == by_reward[i].second;
    verdict(2, all && same_rank,
            fmt::format("per-miner block CIs cover share x total: {}; reward ranking matches block ranking: {}",
                        all ? "all 10" : "no", same_rank ? "yes" : "no"));
}

double attacker_reward_share(const RunReport& r)
{
    Amount total = 0, attacker = 0;
    for (const MinerReport& m : r.miners) {
        total += m.reward_subsidy + m.reward_fees;
        if (m.label == "attacker") attacker = m.reward_subsidy + m.reward_fees;
    }
    return total > 0 ? static_cast<double>(attacker) / static_cast<double>(total) : 0.0;
}

double attacker_hash_share(const RunReport& r)
{
    for (const MinerReport& m : r.miners) {
        if (m.label == "attacker") return m.hash_share;
    }
    throw std::runtime_error("no attacker miner");
}

void selfish()
{
    const StudyResult attack = study("selfish-mining");
    const StudyResult base = study("selfish-baseline");

    bool threshold = true;
    bool oracle = true;
    bool increasing = true;
    double last_episodes = -1.0, last_blocks = -1.0;
    for (std::size_t c = 0; c < attack.configs.size(); ++c) {
        const ConfigurationSummary& s = attack.summaries[c];
        const double alpha = stat(s, "attacker_hash_share").mean;
        const SampleStats& reward = stat(s, "attacker_reward_share");
        const SampleStats& share = stat(s, "attacker_block_share");
        const SampleStats& episodes = stat(s, "attack_episodes");
        const SampleStats& withheld = stat(s, "attack_blocks");
        const bool above = alpha > 0.35;
        const bool ok = above ? reward.mean > alpha : reward.mean < alpha;
        threshold = threshold && ok;

        const double expected = test::selfish_revenue(alpha).share();
        const bool agrees = covers(share, expected);
        oracle = oracle && agrees;
        increasing = increasing && episodes.mean > last_episodes && withheld.mean > last_blocks;
        last_episodes = episodes.mean;
        last_blocks = withheld.mean;
        note(fmt::format("alpha {:.3f}: reward share {} ({} alpha); block share {} vs oracle {:.4f} {}; "
                         "successful attacks {}, withheld blocks in chain {}",
                         alpha, ci(reward), above ? "must exceed" : "must stay below", ci(share), expected,
                         agrees ? "ok" : "MISS", ci(episodes), ci(withheld)));
    }

    bool identity = true;
    for (std::size_t c = 0; c < base.configs.size(); ++c) {
        std::vector<double> shares;
        double alpha = 0.0;
        for (const RunReport* r : base.reports(c)) {
            shares.push_back(attacker_reward_share(*r));
            alpha = attacker_hash_share(*r);
        }
        const SampleStats s = summarize(shares);
        const bool ok = covers(s, alpha);
        identity = identity && ok;
        note(fmt::format("baseline alpha {:.3f}: reward share {} {}", alpha, ci(s), ok ? "ok" : "MISS"));
    }
    verdict(3, threshold && identity,
            fmt::format("attacker below alpha for 0.1-0.3 and above for 0.4: {}; honest baseline on identity: {}",
                        threshold ? "yes" : "no", identity ? "yes" : "no"));
    verdict(4, oracle && increasing,
            fmt::format("oracle (gamma=0) inside every block-share CI: {}; successful attacks and withheld blocks strictly "
                        "increasing: {}",
                        oracle ? "yes" : "no", increasing ? "yes" : "no"));
}

struct Convergence {
    double initial = 0.0;
    double late_spacing = 0.0;
    std::uint32_t epochs = 0;
};

Convergence converge(double initial_difficulty, std::uint64_t seed)
{
    constexpr std::uint32_t kEpochs = 5;
    const std::string text = fmt::format(R"(name: retarget
duration: 400d
consensus: {{initial_difficulty: {}}}
nodes:
  - name: miner
    miner: {{hash_rate: 1}}
)",
                                         initial_difficulty);
    const ScenarioConfig cfg = expand_configurations(text, "retarget").front().config;
    Kernel kernel;
    Network net(kernel, seed, cfg.network, cfg.nodes, default_manager_factory());
    net.start();
    const std::uint32_t epoch = cfg.network.consensus.difficulty.retarget_interval;
    SimTime t = SimTime::from_seconds_int(86400);
    while (net.blocks().get(net.node(NodeId{0}).view.main_tip()).height < kEpochs * epoch) {
        kernel.run_until(t);
        t = t + SimTime::from_seconds_int(86400);
    }
    const auto chain = net.node(NodeId{0}).view.main_chain();
    // Epochs 3..5: the clamp needs at most two retargets for a 6x error.
    const std::uint32_t from = 2 * epoch, to = kEpochs * epoch;
    const double span = (net.blocks().get(chain[to]).created - net.blocks().get(chain[from]).created).seconds();
    return {initial_difficulty, span / (to - from), kEpochs};
}

void retarget_gate()
{
    const DifficultyParams p{2016, SimTime::from_seconds_int(600), 4.0};
    const SimTime target = p.target_timespan();
    const bool identity = retarget(1.0, target, p) == 1.0 && retarget(7.5, target, p) == 7.5;
    const bool doubling = retarget(3.0, SimTime{target.micros / 2}, p) == 6.0 && retarget(1.0, SimTime{target.micros * 2}, p) == 0.5;
    const bool clamp = retarget(1.0, SimTime{target.micros / 10}, p) == 4.0 &&
                       retarget(1.0, SimTime{target.micros * 10}, p) == 0.25 && retarget(2.0, SimTime{}, p) == 8.0;

    bool converged = true;
    std::string detail;
    std::uint64_t seed = 5;
    for (double initial : {6.0, 0.2}) {
        const Convergence c = converge(initial, seed++);
        const bool ok = std::abs(c.late_spacing - 600.0) <= 30.0;
        converged = converged && ok;
        detail += fmt::format("; initial difficulty {} -> spacing {:.1f} s over epochs 3-{}", c.initial,
                              c.late_spacing, c.epochs);
    }
    verdict(5, identity && doubling && clamp && converged,
            fmt::format("identity {}, x2 {}, clamp {}{} (bound 600 +/- 30 s)", identity ? "ok" : "FAIL",
                        doubling ? "ok" : "FAIL", clamp ? "ok" : "FAIL", detail));
}

std::string fuzzed_scenario(std::mt19937_64& rng)
{
    const auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    const auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    const int miners = pick(3, 9);
    const bool attacker = pick(0, 1) == 1;
    const int users = 50 - miners - (attacker ? 1 : 0);
    std::string rates;
    for (int i = 0; i < miners; ++i) rates += fmt::format("{}{:.3f}", i ? ", " : "", uni(0.5, 20.0));

    std::string s = fmt::format(R"(name: fuzz
duration: 1d
consensus:
  max_block_size: {}
  coinbase_maturity: {}
  retarget_interval: {}
propagation:
  block_delay: {{exponential: {:.2f}}}
  tx_delay: {{uniform: [0, {:.2f}]}}
wallet: {{dust_threshold: {}, genesis_allocation: {}}}
maintenance: {{cleanup_interval: {}, retention_depth: {}}}
metrics: {{check_invariants: true, invariant_interval: 1800}}
txgen_defaults:
  interval: {:.2f}
  amount: {{uniform: [1000, {}]}}
  fee_rate: {{uniform: [0, {:.1f}]}}
  outputs: {{empirical: [1, 1, 2, 3, {}]}}
  min_confirmations: {}
nodes:
  - name: user
    count: {}
    txgen: true
  - name: miner
    count: {}
    txgen: true
    miner: {{hash_rate: [{}]}}
)",
                                pick(2000, 400000), pick(0, 100), pick(10, 2016), uni(0.2, 30.0), uni(0.1, 5.0),
                                pick(0, 2000), pick(1, 50) * 10000000LL, pick(60, 7200), pick(2, 50), uni(2.0, 40.0),
                                pick(10000, 100000000), uni(1.0, 80.0), pick(1, 8), pick(0, 2), users, miners, rates);
    if (attacker) {
        s += fmt::format("  - name: attacker\n    selfish: true\n    txgen: true\n    miner: {{hash_rate: {:.3f}}}\n",
                         uni(2.0, 40.0));
    }
    return s;
}

void properties(const std::string& unit)
{
    bool units = false;
    if (!unit.empty()) {
        note("randomized property suites (10^4 cases each):");
        units = run_command({unit, "--test-case=random*,*random network*", "--no-version"}) == 0;
    }

    constexpr int kScenarios = 3;
    std::mt19937_64 rng(20240611);
    bool fuzz = true;
    std::string detail;
    for (int i = 0; i < kScenarios; ++i) {
        const std::string text = fuzzed_scenario(rng);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const ScenarioConfig cfg = expand_configurations(text, "fuzz").front().config;
            const RunReport r = run_simulation(cfg, 100 + i);
            note(fmt::format("fuzz {}: {} nodes, {:.0f} main blocks, {:.0f} stale, {:.0f} reorgs, {:.0f} tx, {:.0f} "
                             "invariant checks, {:.1f} s",
                             i, r.node_labels.size(), r.metric("main_blocks"), r.metric("stale_blocks"),
                             r.metric("reorgs"), r.metric("tx_generated"), 86400.0 / 1800.0, seconds_since(t0)));
        } catch (const std::exception& e) {
            fuzz = false;
            note(fmt::format("fuzz {} failed: {}\n{}", i, e.what(), text));
        }
    }
    verdict(6, units && fuzz,
            fmt::format("randomized property suites: {}; {} fuzzed 50-node 1-day scenarios with invariant checks: {}",
                        unit.empty() ? "not run (no --unit)" : units ? "pass" : "FAIL", kScenarios,
                        fuzz ? "pass" : "FAIL"));
}

std::map<std::string, std::string> csv_files(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        out[fs::relative(e.path(), dir).string()] = buf.str();
    }
    return out;
}

void determinism(const std::string& cli, const fs::path& work)
{
    if (cli.empty()) {
        verdict(7, false, "no --cli given");
        return;
    }
    struct Case {
        std::string preset, until, reps;
    };
    const std::vector<Case> cases{{"selfish-mining", "6h", "2"}, {"honest-62", "4h", "2"}};
    bool identical = true, differs = true;
    std::size_t files = 0;
    for (const Case& c : cases) {
        const auto invoke = [&](const std::string& seed, const std::string& tag) {
            const fs::path out = work / (c.preset + "-" + tag);
            fs::remove_all(out);
            const int rc = run_command({cli, "run", "preset:" + c.preset, "--until", c.until, "--reps", c.reps, "--seed",
                                        seed, "--out", out.string(), "-q"},
                                       true);
            if (rc != 0) throw std::runtime_error(fmt::format("{} exited with {}", cli, rc));
            return csv_files(out);
        };
        const auto a = invoke("7", "a");
        const auto b = invoke("7", "b");
        const auto other = invoke("1007", "c");
        files += a.size();
        const bool same = !a.empty() && a == b;
        std::size_t changed = 0;
        for (const auto& [name, bytes] : a) {
            auto it = other.find(name);
            if (it == other.end() || it->second != bytes) ++changed;
        }
        identical = identical && same;
        differs = differs && changed > 0;
        note(fmt::format("{}: {} CSV files, repeat identical: {}, seed change alters {} files", c.preset, a.size(),
                         same ? "yes" : "no", changed));
    }
    verdict(7, identical && differs,
            fmt::format("{} CSV files byte-identical across invocations: {}; seed change alters output: {}", files,
                        identical ? "yes" : "no", differs ? "yes" : "no"));
}

struct Measured {
    std::string label;
    double seconds = 0.0;     // mean over seeds
    double peak_mb = 0.0;     // mean over seeds
    double max_seconds = 0.0; // slowest single run
    double max_peak_mb = 0.0; // largest single run
    bool ok = true;
};

constexpr int kScaleSeeds = 3;

// Runs each configuration with seeds seed..seed+kScaleSeeds-1, each in a child process so peak RSS is per run.
std::vector<Measured> measure(std::string_view preset)
{
    const std::vector<Configuration> configs = expand_configurations(preset_text(preset), preset);
    std::vector<Measured> out;
    for (const Configuration& c : configs) {
        Measured m;
        m.label = c.factor_values.empty() ? "" : c.factor_values.front().second;
        std::vector<std::string> runs;
        for (int k = 0; k < kScaleSeeds; ++k) {
            const std::uint64_t seed = c.config.seed + static_cast<std::uint64_t>(k);
            std::fflush(stdout);
            const auto t0 = std::chrono::steady_clock::now();
            const pid_t pid = fork();
            if (pid < 0) throw std::runtime_error("fork failed");
            if (pid == 0) {
                try {
                    run_simulation(c.config, seed);
                } catch (const std::exception& e) {
                    fmt::print(stderr, "{}\n", e.what());
                    _exit(1);
                }
                _exit(0);
            }
            int status = 0;
            rusage usage{};
            wait4(pid, &status, 0, &usage);
            const double secs = seconds_since(t0);
            const double mb = static_cast<double>(usage.ru_maxrss) / 1024.0;
            m.ok = m.ok && WIFEXITED(status) && WEXITSTATUS(status) == 0;
            m.seconds += secs / kScaleSeeds;
            m.peak_mb += mb / kScaleSeeds;
            m.max_seconds = std::max(m.max_seconds, secs);
            m.max_peak_mb = std::max(m.max_peak_mb, mb);
            runs.push_back(fmt::format("{:.1f} s/{:.1f} MB", secs, mb));
        }
        note(fmt::format("{} nodes={}: mean {:.1f} s, mean peak RSS {:.1f} MB (seeds: {}){}", preset, m.label,
                         m.seconds, m.peak_mb, fmt::join(runs, ", "), m.ok ? "" : " (run failed)"));
        out.push_back(m);
    }
    return out;
}

template <class F>
bool increasing(const std::vector<Measured>& v, F key)
{
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(key(v[i]) > key(v[i - 1]))) return false;
    }
    return true;
}

void scale()
{
    const std::vector<Measured> nodes = measure("scale-nodes");
    const std::vector<Measured> combined = measure("scale-combined");

    bool budget = true;
    for (const auto* v : {&nodes, &combined}) {
        for (const Measured& m : *v) budget = budget && m.ok && m.max_seconds < 600.0 && m.max_peak_mb < 4096.0;
    }
    const auto mem = [](const Measured& m) { return m.peak_mb; };
    const auto time = [](const Measured& m) { return m.seconds; };
    const bool mem_nodes = increasing(nodes, mem);
    const bool grow = increasing(combined, mem) && increasing(combined, time);
    const bool time_falls = !increasing(nodes, time) && nodes.back().seconds < nodes.front().seconds;
    note(fmt::format("report only: time at fixed 3 tx/s from 10 to 50 nodes {:.1f} s -> {:.1f} s ({})",
                     nodes.front().seconds, nodes.back().seconds, time_falls ? "decreasing" : "not decreasing"));
    verdict(8, budget && mem_nodes && grow,
            fmt::format("every run < 600 s and < 4096 MB: {}; mean memory increasing in nodes at 3 tx/s: {}; mean time and "
                        "memory increasing as nodes and rate grow together: {}",
                        budget ? "yes" : "no", mem_nodes ? "yes" : "no", grow ? "yes" : "no"));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance gates"};
    std::string group, unit, cli, work = "acceptance-work";
    app.add_option("group", group, "honest, selfish, retarget, properties, determinism or scale")->required();
    app.add_option("--unit", unit, "Unit test binary");
    app.add_option("--cli", cli, "chainsim binary");
    app.add_option("--work", work, "Scratch directory");
    CLI11_PARSE(app, argc, argv);

    try {
        if (group == "honest") {
            honest();
        } else if (group == "selfish") {
            selfish();
        } else if (group == "retarget") {
            retarget_gate();
        } else if (group == "properties") {
            properties(unit);
        } else if (group == "determinism") {
            fs::create_directories(work);
            determinism(cli, fs::absolute(work));
        } else if (group == "scale") {
            scale();
        } else {
            fmt::print(stderr, "unknown group {}\n", group);
            return 2;
        }
    } catch (const std::exception& e) {
        fmt::print("error: {}\n", e.what());
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
