#include <chainsim/scenario/config.hpp>

#include <chainsim/scenario/presets.hpp>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace chainsim {

namespace {

std::string summarize(const std::vector<std::string>& problems)
{
    std::string msg = fmt::format("invalid scenario ({} problem{})", problems.size(), problems.size() == 1 ? "" : "s");
    for (const std::string& p : problems) msg += "\n  " + p;
    return msg;
}

std::string join(const std::string& path, std::string_view key)
{
    return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

std::string join(const std::string& path, std::size_t index)
{
    return fmt::format("{}.{}", path, index);
}

class Reader {
public:
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) { errors.push_back(fmt::format("{}: {}", path, msg)); }

    bool map(const YAML::Node& n, const std::string& path)
    {
        if (n.IsMap()) return true;
        fail(path, "expected a mapping");
        return false;
    }

    void keys(const YAML::Node& n, const std::string& path, std::initializer_list<std::string_view> allowed)
    {
        for (const auto& kv : n) {
            const std::string key = kv.first.Scalar();
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(join(path, key), "unknown key");
        }
    }

    std::optional<double> real(const YAML::Node& n, const std::string& path)
    {
        if (!n.IsScalar()) {
            fail(path, "expected a number");
            return std::nullopt;
        }
        const std::string& s = n.Scalar();
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) {
            fail(path, fmt::format("expected a number, got '{}'", s));
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::int64_t> integer(const YAML::Node& n, const std::string& path, std::int64_t min)
    {
        if (!n.IsScalar()) {
            fail(path, "expected an integer");
            return std::nullopt;
        }
        const std::string& s = n.Scalar();
        std::int64_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) {
            fail(path, fmt::format("expected an integer, got '{}'", s));
            return std::nullopt;
        }
        if (v < min) {
            fail(path, fmt::format("must be at least {} (got {})", min, v));
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::uint64_t> unsigned64(const YAML::Node& n, const std::string& path)
    {
        if (!n.IsScalar()) {
            fail(path, "expected a non-negative integer");
            return std::nullopt;
        }
        const std::string& s = n.Scalar();
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) {
            fail(path, fmt::format("expected a non-negative integer, got '{}'", s));
            return std::nullopt;
        }
        return v;
    }

    std::optional<bool> boolean(const YAML::Node& n, const std::string& path)
    {
        bool v = false;
        if (n.IsScalar() && YAML::convert<bool>::decode(n, v)) return v;
        fail(path, "expected true or false");
        return std::nullopt;
    }

    std::optional<SimTime> duration(const YAML::Node& n, const std::string& path, bool allow_zero)
    {
        SimTime t;
        if (!n.IsScalar() || !parse_duration(n.Scalar(), t)) {
            fail(path, "expected a duration (seconds, optionally suffixed s/m/h/d)");
            return std::nullopt;
        }
        if (!allow_zero && t.micros == 0) {
            fail(path, "must be positive");
            return std::nullopt;
        }
        return t;
    }

    std::optional<Distribution> distribution(const YAML::Node& n, const std::string& path)
    {
        std::optional<Distribution> d;
        if (n.IsScalar()) {
            if (auto v = real(n, path)) d = Distribution::constant(*v);
        } else if (n.IsMap() && n.size() == 1) {
            const std::string kind = n.begin()->first.Scalar();
            const YAML::Node arg = n.begin()->second;
            const std::string sub = join(path, kind);
            if (kind == "constant") {
                if (auto v = real(arg, sub)) d = Distribution::constant(*v);
            } else if (kind == "exponential") {
                if (auto v = real(arg, sub)) d = Distribution::exponential(*v);
            } else if (kind == "uniform") {
                if (!arg.IsSequence() || arg.size() != 2) {
                    fail(sub, "expected [low, high]");
                } else {
                    auto lo = real(arg[0], join(sub, std::size_t{0}));
                    auto hi = real(arg[1], join(sub, std::size_t{1}));
                    if (lo && hi) d = Distribution::uniform(*lo, *hi);
                }
            } else if (kind == "empirical") {
                if (!arg.IsSequence() || arg.size() == 0) {
                    fail(sub, "expected a non-empty list of values");
                } else {
                    std::vector<double> values;
                    bool ok = true;
                    for (std::size_t i = 0; i < arg.size(); ++i) {
                        if (auto v = real(arg[i], join(sub, i))) {
                            values.push_back(*v);
                        } else {
                            ok = false;
                        }
                    }
                    if (ok) d = Distribution::empirical(std::move(values));
                }
            } else {
                fail(join(path, kind), "unknown distribution (use constant, uniform, exponential or empirical)");
            }
        } else {
            fail(path, "expected a number or a single-key distribution mapping");
        }
        if (d) {
            if (auto problem = d->validate()) {
                fail(path, *problem);
                return std::nullopt;
            }
        }
        return d;
    }

    /// Distribution whose support must stay at or above `min`.
    std::optional<Distribution> bounded(const YAML::Node& n, const std::string& path, double min)
    {
        auto d = distribution(n, path);
        if (d && d->min() < min) {
            fail(path, fmt::format("{} can produce values below {}", d->describe(), min));
            return std::nullopt;
        }
        return d;
    }
};

template <class T, class F>
void read(const YAML::Node& map, const std::string& path, const char* key, T& out, F&& parse)
{
    const YAML::Node n = map[key];
    if (!n.IsDefined() || n.IsNull()) return;
    if (auto v = parse(n, join(path, key))) out = static_cast<T>(*v);
}

void read_txgen(Reader& r, const YAML::Node& n, const std::string& path, TxGenConfig& cfg)
{
    if (!r.map(n, path)) return;
    r.keys(n, path, {"interval", "amount", "fee_rate", "outputs", "min_confirmations"});
    if (const YAML::Node v = n["interval"]; v.IsDefined()) {
        if (auto t = r.duration(v, join(path, "interval"), false)) cfg.mean_interval = t->seconds();
    }
    read(n, path, "amount", cfg.amount, [&](auto& x, auto p) { return r.bounded(x, p, 0.0); });
    read(n, path, "fee_rate", cfg.fee_rate, [&](auto& x, auto p) { return r.bounded(x, p, 0.0); });
    read(n, path, "outputs", cfg.recipients, [&](auto& x, auto p) { return r.bounded(x, p, 1.0); });
    read(n, path, "min_confirmations", cfg.min_confirmations, [&](auto& x, auto p) { return r.integer(x, p, 0); });
}

ScenarioConfig build(const YAML::Node& root, Reader& r)
{
    ScenarioConfig cfg;
    if (!r.map(root, "(root)")) return cfg;
    r.keys(root, "", {"name", "description", "duration", "seed", "repetitions", "consensus", "propagation", "wallet",
                      "maintenance", "metrics", "txgen_defaults", "nodes", "factors"});

    if (const YAML::Node n = root["name"]; n.IsDefined()) cfg.name = n.Scalar();
    if (const YAML::Node n = root["description"]; n.IsDefined()) cfg.description = n.Scalar();
    if (const YAML::Node n = root["duration"]; n.IsDefined()) {
        if (auto t = r.duration(n, "duration", true)) cfg.duration = *t;
    } else {
        r.fail("duration", "required");
    }
    read(root, "", "seed", cfg.seed, [&](auto& x, auto p) { return r.unsigned64(x, p); });
    read(root, "", "repetitions", cfg.repetitions, [&](auto& x, auto p) { return r.integer(x, p, 1); });

    NetworkParams& net = cfg.network;
    if (const YAML::Node n = root["consensus"]; n.IsDefined() && r.map(n, "consensus")) {
        const std::string p = "consensus";
        r.keys(n, p, {"block_subsidy", "max_block_size", "coinbase_maturity", "initial_difficulty", "retarget_interval",
                      "target_spacing", "max_adjustment"});
        ConsensusParams& c = net.consensus;
        read(n, p, "block_subsidy", c.block_subsidy, [&](auto& x, auto q) { return r.integer(x, q, 0); });
        read(n, p, "max_block_size", c.max_block_size, [&](auto& x, auto q) {
            return r.integer(x, q, static_cast<std::int64_t>(kCoinbaseSize));
        });
        read(n, p, "coinbase_maturity", c.coinbase_maturity, [&](auto& x, auto q) { return r.integer(x, q, 0); });
        read(n, p, "retarget_interval", c.difficulty.retarget_interval,
             [&](auto& x, auto q) { return r.integer(x, q, 1); });
        read(n, p, "target_spacing", c.difficulty.target_spacing,
             [&](auto& x, auto q) { return r.duration(x, q, false); });
        read(n, p, "initial_difficulty", c.initial_difficulty, [&](auto& x, auto q) -> std::optional<double> {
            auto v = r.real(x, q);
            if (v && *v <= 0.0) {
                r.fail(q, "must be positive");
                return std::nullopt;
            }
            return v;
        });
        read(n, p, "max_adjustment", c.difficulty.max_adjustment, [&](auto& x, auto q) -> std::optional<double> {
            auto v = r.real(x, q);
            if (v && *v < 1.0) {
                r.fail(q, "must be at least 1");
                return std::nullopt;
            }
            return v;
        });
    }

    if (const YAML::Node n = root["propagation"]; n.IsDefined() && r.map(n, "propagation")) {
        r.keys(n, "propagation", {"block_delay", "tx_delay"});
        read(n, "propagation", "block_delay", net.propagation.block_delay,
             [&](auto& x, auto q) { return r.bounded(x, q, 0.0); });
        read(n, "propagation", "tx_delay", net.propagation.tx_delay,
             [&](auto& x, auto q) { return r.bounded(x, q, 0.0); });
    }

    Amount default_allocation = 10 * kCoin;
    if (const YAML::Node n = root["wallet"]; n.IsDefined() && r.map(n, "wallet")) {
        r.keys(n, "wallet", {"dust_threshold", "genesis_allocation"});
        read(n, "wallet", "dust_threshold", net.dust_threshold, [&](auto& x, auto q) { return r.integer(x, q, 0); });
        read(n, "wallet", "genesis_allocation", default_allocation,
             [&](auto& x, auto q) { return r.integer(x, q, 0); });
    }

    if (const YAML::Node n = root["maintenance"]; n.IsDefined() && r.map(n, "maintenance")) {
        r.keys(n, "maintenance", {"cleanup_interval", "retention_depth"});
        read(n, "maintenance", "cleanup_interval", net.cleanup_interval,
             [&](auto& x, auto q) { return r.duration(x, q, true); });
        read(n, "maintenance", "retention_depth", net.retention_depth,
             [&](auto& x, auto q) { return r.integer(x, q, 1); });
    }

    if (const YAML::Node n = root["metrics"]; n.IsDefined() && r.map(n, "metrics")) {
        r.keys(n, "metrics", {"sample_interval", "check_invariants", "invariant_interval"});
        read(n, "metrics", "sample_interval", net.sample_interval,
             [&](auto& x, auto q) { return r.duration(x, q, true); });
        read(n, "metrics", "check_invariants", net.check_invariants, [&](auto& x, auto q) { return r.boolean(x, q); });
        read(n, "metrics", "invariant_interval", net.invariant_interval,
             [&](auto& x, auto q) { return r.duration(x, q, false); });
    }

    TxGenConfig txgen_defaults;
    if (const YAML::Node n = root["txgen_defaults"]; n.IsDefined()) read_txgen(r, n, "txgen_defaults", txgen_defaults);

    const YAML::Node nodes = root["nodes"];
    if (!nodes.IsDefined() || !nodes.IsSequence() || nodes.size() == 0) {
        r.fail("nodes", "a non-empty list of node groups is required");
        return cfg;
    }
    for (std::size_t g = 0; g < nodes.size(); ++g) {
        const YAML::Node grp = nodes[g];
        const std::string p = join("nodes", g);
        if (!r.map(grp, p)) continue;
        r.keys(grp, p, {"name", "count", "miner", "txgen", "selfish", "wallet", "genesis_allocation"});

        std::string name = fmt::format("group{}", g);
        if (const YAML::Node n = grp["name"]; n.IsDefined()) name = n.Scalar();
        std::int64_t count = 1;
        read(grp, p, "count", count, [&](auto& x, auto q) { return r.integer(x, q, 1); });

        NodeConfig base;
        base.genesis_allocation = default_allocation;
        read(grp, p, "wallet", base.wallet, [&](auto& x, auto q) { return r.boolean(x, q); });
        read(grp, p, "selfish", base.selfish, [&](auto& x, auto q) { return r.boolean(x, q); });
        read(grp, p, "genesis_allocation", base.genesis_allocation,
             [&](auto& x, auto q) { return r.integer(x, q, 0); });

        if (const YAML::Node n = grp["txgen"]; n.IsDefined()) {
            const std::string q = join(p, "txgen");
            if (n.IsScalar()) {
                if (auto on = r.boolean(n, q); on && *on) base.txgen = txgen_defaults;
            } else {
                TxGenConfig t = txgen_defaults;
                read_txgen(r, n, q, t);
                base.txgen = t;
            }
            if (base.txgen && !base.wallet) r.fail(q, "transaction generation requires a wallet");
        }

        std::vector<double> rates;
        if (const YAML::Node m = grp["miner"]; m.IsDefined()) {
            const std::string q = join(p, "miner");
            if (r.map(m, q)) {
                r.keys(m, q, {"hash_rate"});
                const YAML::Node h = m["hash_rate"];
                const std::string hq = join(q, "hash_rate");
                const auto check = [&](const YAML::Node& x, const std::string& xp) {
                    if (auto v = r.real(x, xp)) {
                        if (*v <= 0.0) {
                            r.fail(xp, fmt::format("hash rate must be positive (got {})", *v));
                        } else {
                            rates.push_back(*v);
                        }
                    }
                };
                if (!h.IsDefined()) {
                    r.fail(hq, "required");
                } else if (h.IsSequence()) {
                    if (static_cast<std::int64_t>(h.size()) != count) {
                        r.fail(hq, fmt::format("list has {} entries but count is {}", h.size(), count));
                    }
                    for (std::size_t i = 0; i < h.size(); ++i) check(h[i], join(hq, i));
                } else {
                    check(h, hq);
                    if (rates.size() == 1) rates.assign(static_cast<std::size_t>(count), rates.front());
                }
            }
        }
        if (base.selfish && !grp["miner"].IsDefined()) r.fail(join(p, "selfish"), "a selfish node must be a miner");

        for (std::int64_t i = 0; i < count; ++i) {
            NodeConfig nc = base;
            nc.label = count == 1 ? name : fmt::format("{}-{}", name, i);
            if (static_cast<std::size_t>(i) < rates.size()) nc.miner = MinerConfig{rates[static_cast<std::size_t>(i)]};
            cfg.nodes.push_back(std::move(nc));
        }
    }

    std::size_t miners = 0;
    std::size_t wallets = 0;
    bool any_txgen = false;
    for (const NodeConfig& nc : cfg.nodes) {
        if (nc.miner) ++miners;
        if (nc.wallet) ++wallets;
        if (nc.txgen) any_txgen = true;
    }
    if (cfg.duration.micros > 0 && miners == 0 && r.errors.empty()) r.fail("nodes", "at least one miner is required");
    if (any_txgen && wallets < 2) r.fail("nodes", "transaction generation needs at least two wallets");
    return cfg;
}

std::string scalar_label(const YAML::Node& n)
{
    if (n.IsScalar()) return n.Scalar();
    YAML::Emitter out;
    out << YAML::Flow << n;
    return out.c_str();
}

std::vector<Factor> parse_factors(const YAML::Node& root, Reader& r)
{
    std::vector<Factor> factors;
    const YAML::Node fs = root["factors"];
    if (!fs.IsDefined() || fs.IsNull()) return factors;
    if (!fs.IsSequence()) {
        r.fail("factors", "expected a list");
        return factors;
    }
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const YAML::Node f = fs[i];
        const std::string p = join("factors", i);
        if (!r.map(f, p)) continue;
        r.keys(f, p, {"name", "path", "values", "levels"});
        Factor factor;
        factor.name = f["name"].IsDefined() ? f["name"].Scalar() : fmt::format("factor{}", i);
        if (f["path"].IsDefined() == f["levels"].IsDefined()) {
            r.fail(p, "give either path + values or levels");
            continue;
        }
        if (f["path"].IsDefined()) {
            const YAML::Node values = f["values"];
            if (!values.IsDefined() || !values.IsSequence() || values.size() == 0) {
                r.fail(join(p, "values"), "expected a non-empty list");
                continue;
            }
            for (std::size_t k = 0; k < values.size(); ++k) {
                factor.levels.push_back({scalar_label(values[k]), {{f["path"].Scalar(), YAML::Dump(values[k])}}});
            }
        } else {
            const YAML::Node levels = f["levels"];
            if (!levels.IsSequence() || levels.size() == 0) {
                r.fail(join(p, "levels"), "expected a non-empty list");
                continue;
            }
            for (std::size_t k = 0; k < levels.size(); ++k) {
                const YAML::Node lv = levels[k];
                const std::string lp = join(join(p, "levels"), k);
                if (!r.map(lv, lp)) continue;
                Factor::Level level;
                level.label = std::to_string(k);
                for (const auto& kv : lv) {
                    if (kv.first.Scalar() == "label") {
                        level.label = kv.second.Scalar();
                    } else {
                        level.assignments.emplace_back(kv.first.Scalar(), YAML::Dump(kv.second));
                    }
                }
                factor.levels.push_back(std::move(level));
            }
        }
        factors.push_back(std::move(factor));
    }
    return factors;
}

YAML::Node load_yaml(std::string_view text, std::string_view origin)
{
    try {
        return YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError({fmt::format("{}: {}", origin, e.what())});
    }
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(summarize(problems)), problems_(std::move(problems))
{
}

void assign_path(YAML::Node& root, const std::string& path, const std::string& value)
{
    YAML::Node cur;
    cur.reset(root);
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        const bool last = dot == std::string::npos;
        YAML::Node next;
        if (cur.IsSequence()) {
            std::size_t idx = 0;
            const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
            if (ec != std::errc{} || p != part.data() + part.size() || idx >= cur.size()) {
                throw ConfigError({fmt::format("{}: no list element '{}'", path, part)});
            }
            next.reset(cur[idx]);
        } else if (cur.IsMap() || cur.IsNull()) {
            next.reset(cur[part]);
        } else {
            throw ConfigError({fmt::format("{}: '{}' is not inside a mapping or list", path, part)});
        }
        if (last) {
            next = YAML::Load(value);
            return;
        }
        if (!next.IsDefined() && cur.IsMap()) {
            // Missing sections are created so defaults can be swept.
            cur[part] = YAML::Node(YAML::NodeType::Map);
            next.reset(cur[part]);
        }
        cur.reset(next);
        start = dot + 1;
    }
}

ScenarioConfig parse_scenario(std::string_view text, std::string_view origin)
{
    const YAML::Node root = load_yaml(text, origin);
    Reader r;
    ScenarioConfig cfg = build(root, r);
    if (root.IsMap()) cfg.factors = parse_factors(root, r);
    if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
    return cfg;
}

std::string read_scenario_text(const std::string& source)
{
    if (source.starts_with("preset:")) {
        const std::string name = source.substr(7);
        const Preset* p = find_preset(name);
        if (!p) throw ConfigError({fmt::format("{}: no such preset", name)});
        return std::string(p->text);
    }
    std::ifstream in(source);
    if (!in) throw ConfigError({fmt::format("{}: cannot open file", source)});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig load_scenario(const std::string& path)
{
    return parse_scenario(read_scenario_text(path), path);
}

ScenarioConfig load_scenario_source(const std::string& source)
{
    return parse_scenario(read_scenario_text(source), source);
}

std::vector<Configuration> expand_configurations(std::string_view text, std::string_view origin)
{
    const YAML::Node root = load_yaml(text, origin);
    Reader r;
    const std::vector<Factor> factors = root.IsMap() ? parse_factors(root, r) : std::vector<Factor>{};
    if (!r.errors.empty()) throw ConfigError(std::move(r.errors));

    std::size_t total = 1;
    for (const Factor& f : factors) total *= f.levels.size();

    std::vector<Configuration> out;
    std::vector<std::string> problems;
    for (std::size_t idx = 0; idx < total; ++idx) {
        YAML::Node doc = YAML::Clone(root);
        if (doc.IsMap()) doc.remove("factors");
        Configuration c;
        c.index = idx;
        std::size_t rest = idx;
        std::vector<std::size_t> picks(factors.size());
        for (std::size_t k = factors.size(); k-- > 0;) {
            picks[k] = rest % factors[k].levels.size();
            rest /= factors[k].levels.size();
        }
        std::string tag;
        try {
            for (std::size_t k = 0; k < factors.size(); ++k) {
                const Factor::Level& level = factors[k].levels[picks[k]];
                c.factor_values.emplace_back(factors[k].name, level.label);
                tag += fmt::format("{}{}={}", tag.empty() ? "" : ",", factors[k].name, level.label);
                for (const auto& [path, value] : level.assignments) assign_path(doc, path, value);
            }
        } catch (const ConfigError& e) {
            for (const std::string& p : e.problems()) problems.push_back(fmt::format("[{}] {}", tag, p));
            continue;
        }
        Reader cr;
        c.config = build(doc, cr);
        c.config.factors = factors;
        for (const std::string& p : cr.errors) {
            problems.push_back(factors.empty() ? p : fmt::format("[{}] {}", tag, p));
        }
        out.push_back(std::move(c));
    }
    if (!problems.empty()) {
        std::vector<std::string> unique;
        for (std::string& p : problems) {
            if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(std::move(p));
        }
        throw ConfigError(std::move(unique));
    }
    return out;
}

} // namespace chainsim
