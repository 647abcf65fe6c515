// chainsim: run, validate and inspect blockchain simulation scenarios.

#include <chainsim/scenario/presets.hpp>
#include <chainsim/scenario/report.hpp>
#include <chainsim/scenario/study.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

using namespace chainsim;

namespace {

int cmd_run(const std::string& source, std::optional<std::uint64_t> seed, std::optional<std::uint32_t> reps,
            const std::string& until, const std::string& out, std::size_t parallel, bool quiet)
{
    StudyOptions opts;
    opts.seed = seed;
    opts.repetitions = reps;
    opts.parallel = parallel;
    if (!until.empty()) {
        SimTime t;
        if (!parse_duration(until, t)) {
            fmt::print(stderr, "error: --until: cannot parse duration '{}'\n", until);
            return 2;
        }
        opts.until = t;
    }
    if (!quiet) opts.progress = [](const std::string& msg) { fmt::print(stderr, "{}\n", msg); };

    const std::string text = read_scenario_text(source);
    expand_configurations(text, source); // validate before touching the output directory
    if (!out.empty()) ensure_writable(out);

    const StudyResult study = run_study(text, source, opts);
    if (!out.empty()) write_study(study, out);
    fmt::print("{}", summary_table(study));
    if (!out.empty()) fmt::print("outputs written to {}\n", out);
    return 0;
}

int cmd_validate(const std::string& source)
{
    const std::vector<Configuration> configs = expand_configurations(read_scenario_text(source), source);
    const ScenarioConfig& c = configs.front().config;
    std::size_t miners = 0, txgen = 0, selfish = 0;
    for (const NodeConfig& n : c.nodes) {
        miners += n.miner.has_value();
        txgen += n.txgen.has_value();
        selfish += n.selfish;
    }
    fmt::print("{}: valid\n  name: {}\n  duration: {}\n  nodes: {} ({} miners, {} generators, {} selfish)\n"
               "  seed: {}, repetitions: {}\n  configurations: {}\n",
               source, c.name.empty() ? "-" : c.name, format_duration(c.duration), c.nodes.size(), miners, txgen,
               selfish, c.seed, c.repetitions, configs.size());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete-event Bitcoin network simulator"};
    app.require_subcommand(1);

    std::string source;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> reps;
    std::string until;
    std::string out;
    std::size_t parallel = 1;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run a scenario study");
    run->add_option("scenario", source, "Scenario file or preset:NAME")->required();
    run->add_option("--seed", seed, "Base seed (runs use seed+0 .. seed+reps-1)");
    run->add_option("--reps", reps, "Repetitions per configuration")->check(CLI::PositiveNumber);
    run->add_option("--until", until, "Simulated duration override, e.g. 6h");
    run->add_option("--out", out, "Output directory for CSV/JSON reports");
    run->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);
    run->add_flag("-q,--quiet", quiet, "No per-run progress on stderr");

    auto* validate = app.add_subcommand("validate", "Check a scenario without running it");
    validate->add_option("scenario", source, "Scenario file or preset:NAME")->required();

    auto* presets_cmd = app.add_subcommand("presets", "List or print shipped scenarios");
    presets_cmd->require_subcommand(1);
    presets_cmd->add_subcommand("list", "List preset names");
    std::string preset_name;
    auto* show = presets_cmd->add_subcommand("show", "Print a preset");
    show->add_option("name", preset_name)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(source, seed, reps, until, out, parallel, quiet);
        if (*validate) return cmd_validate(source);
        if (presets_cmd->got_subcommand("list")) {
            for (const Preset& p : presets()) fmt::print("{}\n", p.name);
            return 0;
        }
        const Preset* p = find_preset(preset_name);
        if (!p) {
            fmt::print(stderr, "error: no preset named '{}'\n", preset_name);
            return 1;
        }
        fmt::print("{}", p->text);
        return 0;
    } catch (const ConfigError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
}
