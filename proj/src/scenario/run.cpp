#include <chainsim/scenario/run.hpp>

#include <chainsim/selfish/selfish_manager.hpp>

#include <chrono>
#include <stdexcept>

namespace chainsim {

double RunReport::metric(std::string_view name) const
{
    for (const auto& [k, v] : metrics) {
        if (k == name) return v;
    }
    throw std::out_of_range("no metric " + std::string(name));
}

ManagerFactory default_manager_factory()
{
    return [](const NodeConfig& cfg, NodeId) -> std::unique_ptr<ChainManager> {
        if (cfg.selfish) return std::make_unique<SelfishChainManager>();
        return std::make_unique<HonestChainManager>();
    };
}

RunReport collect_report(const Network& net, std::uint64_t seed, SimTime duration)
{
    RunReport rep;
    rep.seed = seed;
    rep.duration = duration;
    const BlockStore& blocks = net.blocks();
    const TxStore& txs = net.txs();

    NodeId observer = NodeId{0};
    for (NodeId id : net.node_directory().all()) {
        if (net.node(id).manager->honest()) {
            observer = id;
            break;
        }
    }
    const std::span<const BlockId> chain = net.node(observer).view.main_chain();

    std::vector<std::size_t> miner_index(net.node_count(), SIZE_MAX);
    for (NodeId id : net.node_directory().all()) {
        const Node& n = net.node(id);
        rep.node_labels.push_back(n.label);
        if (!n.miner) continue;
        miner_index[id.value] = rep.miners.size();
        MinerReport m;
        m.node = id;
        m.label = n.label;
        m.hash_rate = n.miner->hash_rate;
        m.hash_share = net.total_hash_rate() > 0 ? n.miner->hash_rate / net.total_hash_rate() : 0.0;
        m.selfish = !n.manager->honest();
        m.blocks_mined = n.miner->blocks_mined;
        rep.miners.push_back(m);
    }

    std::uint64_t tx_confirmed = 0;
    for (BlockId id : chain) {
        const Block& b = blocks.get(id);
        if (b.is_genesis()) continue;
        tx_confirmed += b.txs.size() - 1;
        const std::size_t mi = miner_index[b.miner.value];
        if (mi == SIZE_MAX) throw SimulationError("final chain block mined by a non-miner");
        MinerReport& m = rep.miners[mi];
        ++m.blocks_main;
        m.reward_fees += b.fees;
        m.reward_subsidy += txs.output_total(b.txs.front()) - b.fees;
    }

    const NetworkStats& st = net.stats();
    const Block& tip = blocks.get(chain.back());
    const auto height = static_cast<double>(tip.height);
    const double secs = duration.seconds();

    std::uint64_t reorgs = 0, max_depth = 0, orphans = 0, rejected = 0, evicted = 0;
    std::uint64_t deferred = 0, unfundable = 0;
    double mempool_final = 0.0;
    for (NodeId id : net.node_directory().all()) {
        const Node& n = net.node(id);
        reorgs += n.stats.reorgs;
        max_depth = std::max(max_depth, n.stats.max_reorg_depth);
        orphans += n.stats.orphans_buffered;
        rejected += n.stats.tx_rejected;
        evicted += n.stats.conflict_evicted;
        mempool_final += static_cast<double>(n.mempool.size());
        if (n.txgen) {
            deferred += n.txgen->deferred;
            unfundable += n.txgen->unfundable;
        }
    }
    mempool_final /= static_cast<double>(net.node_count());

    auto& m = rep.metrics;
    const auto put = [&](const char* k, double v) { m.emplace_back(k, v); };
    put("main_blocks", height);
    put("blocks_mined", static_cast<double>(st.blocks_mined));
    put("stale_blocks", static_cast<double>(st.blocks_mined) - height);
    put("mean_block_interval_s", height > 0 ? tip.created.seconds() / height : 0.0);
    put("final_difficulty", tip.next_difficulty);
    put("reorgs", static_cast<double>(reorgs));
    put("max_reorg_depth", static_cast<double>(max_depth));
    put("orphans_buffered", static_cast<double>(orphans));
    put("tx_generated", static_cast<double>(st.tx_generated));
    put("tx_confirmed", static_cast<double>(tx_confirmed));
    put("throughput_tps", secs > 0 ? static_cast<double>(tx_confirmed) / secs : 0.0);
    put("tx_deferred", static_cast<double>(deferred));
    put("tx_unfundable", static_cast<double>(unfundable));
    put("tx_rejected", static_cast<double>(rejected));
    put("conflict_evicted", static_cast<double>(evicted));
    put("mempool_final_mean", mempool_final);
    put("blocks_pruned", static_cast<double>(st.blocks_pruned));
    put("peak_memory_estimate_bytes", static_cast<double>(std::max(st.peak_memory_estimate, net.memory_estimate())));

    for (const MinerReport& mr : rep.miners) {
        if (!mr.selfish) continue;
        const AttackSummary a = summarize_attack(blocks, chain, mr.node);
        Amount total_reward = 0;
        for (const MinerReport& o : rep.miners) total_reward += o.reward_subsidy + o.reward_fees;
        put("attacker_hash_share", mr.hash_share);
        put("attacker_block_share", a.attacker_share());
        put("attacker_reward_share", total_reward > 0 ? static_cast<double>(mr.reward_subsidy + mr.reward_fees) /
                                                            static_cast<double>(total_reward)
                                                      : 0.0);
        put("attack_blocks", static_cast<double>(a.withheld_blocks));
        put("attack_episodes", static_cast<double>(a.episodes));
        break;
    }

    rep.sample_times = st.sample_times;
    rep.mempool_samples = st.mempool_samples;
    return rep;
}

RunReport run_simulation(const ScenarioConfig& config, std::uint64_t seed, const RunOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    Kernel kernel;
    Network net(kernel, seed, config.network, config.nodes, default_manager_factory());
    net.start();
    const SimTime end = options.until.value_or(config.duration);
    kernel.run_until(end);
    RunReport rep = collect_report(net, seed, end);
    rep.events = kernel.dispatched_total();
    rep.metrics.emplace_back("events", static_cast<double>(rep.events));
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace chainsim
