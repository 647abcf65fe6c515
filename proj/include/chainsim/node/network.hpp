#pragma once

#include <chainsim/chain/block_store.hpp>
#include <chainsim/chain/chain_view.hpp>
#include <chainsim/chain/difficulty.hpp>
#include <chainsim/chain/transaction.hpp>
#include <chainsim/kernel/kernel.hpp>
#include <chainsim/kernel/rng.hpp>
#include <chainsim/node/mempool.hpp>
#include <chainsim/node/payment.hpp>
#include <chainsim/node/wallet.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace chainsim {

struct ConsensusParams {
    Amount block_subsidy = 625'000'000;
    std::uint32_t max_block_size = 1'000'000;
    std::uint32_t coinbase_maturity = 100;
    double initial_difficulty = 1.0;
    DifficultyParams difficulty;
};

/// Delays in seconds.
struct PropagationParams {
    Distribution block_delay = Distribution::uniform(0.1, 5.0);
    Distribution tx_delay = Distribution::uniform(0.05, 2.0);
};

struct TxGenConfig {
    double mean_interval = 20.0; // seconds
    Distribution amount = Distribution::uniform(10'000, 2'000'000);     // satoshi, total per transaction
    Distribution fee_rate = Distribution::uniform(1.0, 50.0);           // sat/vB
    Distribution recipients = Distribution::empirical({1, 1, 1, 2, 2, 3}); // recipient outputs (change excluded)
    std::uint32_t min_confirmations = 0;
};

struct MinerConfig {
    double hash_rate = 1.0; // TH/s
};

struct NodeConfig {
    std::string label;
    std::optional<MinerConfig> miner;
    std::optional<TxGenConfig> txgen;
    bool selfish = false;
    bool wallet = true;
    Amount genesis_allocation = 10 * kCoin;
};

struct NetworkParams {
    ConsensusParams consensus;
    PropagationParams propagation;
    Amount dust_threshold = kDefaultDustThreshold;
    std::uint32_t retention_depth = 50;
    SimTime cleanup_interval = SimTime::from_seconds_int(3600);
    SimTime sample_interval = SimTime::from_seconds_int(60);
    bool check_invariants = false;
    SimTime invariant_interval = SimTime::from_seconds_int(3600);
};

/// Size of the coinbase transaction (one synthetic input, one output).
inline constexpr std::uint32_t kCoinbaseSize = estimate_tx_size(1, 1);

class Network;
struct Node;

/// A node's blockchain manager: decides what happens to mined and received blocks.
class ChainManager {
public:
    virtual ~ChainManager() = default;
    virtual void on_mined(Network& net, Node& node, BlockId block) = 0;
    virtual void on_received(Network& net, Node& node, BlockId block) = 0;
    virtual void on_publish(Network&, Node&, std::uint64_t /*data*/) {}
    /// Called on a freshly built block before it enters the store.
    virtual void annotate(Block&) {}
    virtual bool honest() const { return true; }
};

/// Standard manager: extend the local view and relay immediately.
class HonestChainManager final : public ChainManager {
public:
    void on_mined(Network& net, Node& node, BlockId block) override;
    void on_received(Network& net, Node& node, BlockId block) override;
};

struct MinerState {
    double hash_rate = 0.0;
    EventHandle timer;
    std::uint64_t blocks_mined = 0;
};

struct PendingPayment {
    Amount amount = 0;
    double fee_rate = 0.0;
    std::vector<NodeId> recipients;
    bool deferred = false;
};

struct TxGenState {
    TxGenConfig config;
    std::optional<PendingPayment> pending;
    std::uint64_t generated = 0;
    std::uint64_t deferred = 0;
    std::uint64_t unfundable = 0;
};

struct NodeStats {
    std::uint64_t reorgs = 0;
    std::uint64_t max_reorg_depth = 0;
    std::uint64_t tx_accepted = 0;
    std::uint64_t tx_rejected = 0;
    std::uint64_t conflict_evicted = 0;
    std::uint64_t orphans_buffered = 0;
    std::uint64_t duplicate_blocks = 0;
};

struct Node {
    Node(NodeId id, std::string label, const BlockStore& store, std::uint64_t seed);

    NodeId id;
    std::string label;
    ChainView view;
    Mempool mempool;
    std::optional<Wallet> wallet;
    std::optional<MinerState> miner;
    std::optional<TxGenState> txgen;
    std::unique_ptr<ChainManager> manager;
    RngStream mining_rng;
    RngStream txgen_rng;
    NodeStats stats;
};

/// Directory of all nodes (recipients of broadcasts).
class NodeDirectory {
public:
    void add(NodeId id) { ids_.push_back(id); }
    const std::vector<NodeId>& all() const { return ids_; }

private:
    std::vector<NodeId> ids_;
};

/// Directory of wallet addresses.
class WalletDirectory {
public:
    void add(NodeId address) { addresses_.push_back(address); }
    const std::vector<NodeId>& addresses() const { return addresses_; }
    /// Uniformly random address other than `self`; invalid if none exists.
    NodeId random_other(RngStream& rng, NodeId self) const;

private:
    std::vector<NodeId> addresses_;
};

struct NetworkStats {
    std::uint64_t blocks_mined = 0;
    std::uint64_t tx_generated = 0;
    std::uint64_t blocks_pruned = 0;
    std::uint64_t cleanups = 0;
    std::size_t peak_memory_estimate = 0;
    std::vector<SimTime> sample_times;
    std::vector<std::vector<std::uint32_t>> mempool_samples; // [sample][node]
    std::vector<std::string> invariant_violations;
};

using ManagerFactory = std::function<std::unique_ptr<ChainManager>(const NodeConfig&, NodeId)>;

/// One simulation run's world: global stores, directories and nodes, driven by
/// events from the kernel.
class Network {
public:
    Network(Kernel& kernel, std::uint64_t seed, NetworkParams params, const std::vector<NodeConfig>& nodes,
            ManagerFactory factory = {});

    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    /// Schedules the initial timers (mining, transaction generation, cleanup, sampling).
    void start();

    /// Kernel event handler.
    void handle(const Event& ev);

    Kernel& kernel() { return *kernel_; }
    SimTime now() const { return kernel_->now(); }
    const NetworkParams& params() const { return params_; }
    TxStore& txs() { return txs_; }
    const TxStore& txs() const { return txs_; }
    BlockStore& blocks() { return blocks_; }
    const BlockStore& blocks() const { return blocks_; }
    std::size_t node_count() const { return nodes_.size(); }
    Node& node(NodeId id) { return *nodes_[id.value]; }
    const Node& node(NodeId id) const { return *nodes_[id.value]; }
    const NodeDirectory& node_directory() const { return node_directory_; }
    const WalletDirectory& wallet_directory() const { return wallet_directory_; }
    NetworkStats& stats() { return stats_; }
    const NetworkStats& stats() const { return stats_; }
    double total_hash_rate() const { return total_hash_rate_; }
    Amount genesis_supply() const { return genesis_supply_; }

    /// Schedules one delivery per other node with independent delays, never
    /// earlier than `not_before`.
    void broadcast_block(NodeId origin, BlockId block, SimTime not_before = SimTime{});
    void broadcast_tx(NodeId origin, TxId tx);
    /// Latest scheduled delivery time of a block's broadcast.
    SimTime delivery_horizon(BlockId block) const;

    /// Mean time for this miner to find the next block at its current tip.
    SimTime mean_block_interval(const Node& node) const;
    /// Cancels any pending mining timer and draws a fresh one.
    void miner_schedule(Node& node);
    /// Builds a block on the node's main tip and hands it to the node's manager.
    BlockId miner_on_win(Node& node);
    /// Builds a block template without storing it.
    Block assemble_block(const Node& node);

    /// Delivers a relayed transaction to a node's mempool and wallet.
    AcceptResult deliver_tx(Node& node, TxId tx);
    /// Propagates a main-chain change into mempool, wallet, miner and generator.
    void apply_outcome(Node& node, const AddOutcome& outcome);

    /// Transaction generator timer. Returns the emitted transaction, if any.
    std::optional<TxId> txgen_tick(Node& node);
    /// Attempts the pending (deferred) payment.
    std::optional<TxId> txgen_try_emit(Node& node);

    std::size_t cleanup();
    void sample();
    std::size_t memory_estimate() const;
    /// Cancels all mining timers; no further blocks are mined.
    void stop_mining();

    /// True if some transaction in the node's mempool or main chain spends `o`.
    bool spent_in_view(const Node& node, Outpoint o) const;
    /// Per-node value created by genesis plus subsidies on that node's main chain.
    Amount supply_bound(const Node& node) const;

private:
    void wallet_on_block(Node& node, const AddOutcome& outcome, const MempoolUpdate& update);
    void wallet_restore_inputs(Node& node, TxId tx);
    bool touches(const Node& node, TxId tx) const;
    void schedule_txgen(Node& node);
    void check_invariants();

    Kernel* kernel_;
    NetworkParams params_;
    TxStore txs_;
    BlockStore blocks_;
    std::vector<std::unique_ptr<Node>> nodes_;
    NodeDirectory node_directory_;
    WalletDirectory wallet_directory_;
    RngStream propagation_rng_;
    std::vector<SimTime> horizon_;
    std::vector<Kernel::Delivery> fanout_;
    NetworkStats stats_;
    double total_hash_rate_ = 0.0;
    Amount genesis_supply_ = 0;
    bool mining_enabled_ = true;
};

} // namespace chainsim
