#include <chainsim/node/network.hpp>

#include <chainsim/chain/ledger.hpp>
#include <chainsim/node/invariants.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chainsim {

void HonestChainManager::on_mined(Network& net, Node& node, BlockId block)
{
    net.apply_outcome(node, node.view.add_block(block));
    net.broadcast_block(node.id, block);
}

void HonestChainManager::on_received(Network& net, Node& node, BlockId block)
{
    net.apply_outcome(node, node.view.add_block(block));
}

Node::Node(NodeId id_, std::string label_, const BlockStore& store, std::uint64_t seed)
    : id(id_),
      label(std::move(label_)),
      view(id_, store),
      mempool(id_),
      mining_rng(seed, fmt::format("mining/{}", id_.value)),
      txgen_rng(seed, fmt::format("txgen/{}", id_.value))
{
}

NodeId WalletDirectory::random_other(RngStream& rng, NodeId self) const
{
    const auto self_pos = std::find(addresses_.begin(), addresses_.end(), self);
    const std::size_t others = addresses_.size() - (self_pos != addresses_.end() ? 1 : 0);
    if (others == 0) return NodeId{};
    std::size_t i = rng.uniform_index(others);
    if (self_pos != addresses_.end() && i >= static_cast<std::size_t>(self_pos - addresses_.begin())) ++i;
    return addresses_[i];
}

Network::Network(Kernel& kernel, std::uint64_t seed, NetworkParams params, const std::vector<NodeConfig>& nodes,
                 ManagerFactory factory)
    : kernel_(&kernel), params_(std::move(params)), blocks_(txs_), propagation_rng_(seed, "propagation")
{
    if (nodes.empty()) throw std::invalid_argument("network needs at least one node");

    std::vector<TxOutput> allocations;
    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        const NodeConfig& cfg = nodes[i];
        if (cfg.genesis_allocation < 0) throw std::invalid_argument("negative genesis allocation");
        if (cfg.wallet && cfg.genesis_allocation > 0) {
            allocations.push_back({cfg.genesis_allocation, NodeId{i}});
            genesis_supply_ += cfg.genesis_allocation;
        }
    }
    make_genesis(txs_, blocks_, allocations, params_.consensus.initial_difficulty);
    const TxId alloc_tx = blocks_.get(blocks_.genesis()).txs.front();
    horizon_.resize(blocks_.inserted_count());

    for (std::uint32_t i = 0; i < nodes.size(); ++i) {
        const NodeConfig& cfg = nodes[i];
        const NodeId id{i};
        auto node = std::make_unique<Node>(id, cfg.label.empty() ? fmt::format("node{}", i) : cfg.label, blocks_,
                                           seed);
        node_directory_.add(id);
        if (cfg.wallet) {
            node->wallet.emplace(id, params_.consensus.coinbase_maturity);
            node->wallet->credit(alloc_tx, 0, txs_, [](Outpoint) { return false; });
            wallet_directory_.add(id);
        }
        if (cfg.miner) {
            if (!(cfg.miner->hash_rate >= 0.0)) throw std::invalid_argument("negative hash rate");
            node->miner.emplace();
            node->miner->hash_rate = cfg.miner->hash_rate;
            total_hash_rate_ += cfg.miner->hash_rate;
        }
        if (cfg.txgen) {
            if (!cfg.wallet) throw std::invalid_argument(fmt::format("node {}: transaction generator needs a wallet", i));
            node->txgen.emplace();
            node->txgen->config = *cfg.txgen;
        }
        if (factory) node->manager = factory(cfg, id);
        if (!node->manager) node->manager = std::make_unique<HonestChainManager>();
        nodes_.push_back(std::move(node));
    }

    kernel_->set_handler([this](const Event& ev) { handle(ev); });
}

void Network::start()
{
    for (auto& n : nodes_) {
        if (n->miner) miner_schedule(*n);
        if (n->txgen) schedule_txgen(*n);
    }
    if (params_.cleanup_interval.micros > 0) {
        kernel_->schedule(now() + params_.cleanup_interval, kGlobalTarget, EventKind::CleanupTimer);
    }
    if (params_.sample_interval.micros > 0) {
        kernel_->schedule(now(), kGlobalTarget, EventKind::SampleTimer, 0);
    }
    if (params_.check_invariants && params_.invariant_interval.micros > 0) {
        kernel_->schedule(now() + params_.invariant_interval, kGlobalTarget, EventKind::SampleTimer, 1);
    }
}

void Network::handle(const Event& ev)
{
    switch (ev.kind) {
    case EventKind::NewBlock: {
        Node& n = node(NodeId{ev.target});
        const BlockId b{static_cast<std::uint32_t>(ev.data)};
        if (n.view.knows(b)) {
            ++n.stats.duplicate_blocks;
        } else {
            n.manager->on_received(*this, n, b);
        }
        blocks_.release(b);
        break;
    }
    case EventKind::NewTransaction:
        deliver_tx(node(NodeId{ev.target}), TxId{static_cast<std::uint32_t>(ev.data)});
        break;
    case EventKind::MiningTimer:
        miner_on_win(node(NodeId{ev.target}));
        break;
    case EventKind::TxGenTimer:
        txgen_tick(node(NodeId{ev.target}));
        break;
    case EventKind::CleanupTimer:
        cleanup();
        kernel_->schedule(now() + params_.cleanup_interval, kGlobalTarget, EventKind::CleanupTimer);
        break;
    case EventKind::SampleTimer:
        if (ev.data == 0) {
            sample();
            kernel_->schedule(now() + params_.sample_interval, kGlobalTarget, EventKind::SampleTimer, 0);
        } else {
            check_invariants();
            kernel_->schedule(now() + params_.invariant_interval, kGlobalTarget, EventKind::SampleTimer, 1);
        }
        break;
    case EventKind::Publish: {
        Node& n = node(NodeId{ev.target});
        n.manager->on_publish(*this, n, ev.data);
        break;
    }
    case EventKind::EndOfSimulation:
        break;
    }
}

void Network::broadcast_block(NodeId origin, BlockId block, SimTime not_before)
{
    SimTime latest = std::max(now(), not_before);
    for (NodeId to : node_directory_.all()) {
        if (to == origin) continue;
        const double d = std::max(0.0, draw(propagation_rng_, params_.propagation.block_delay));
        const SimTime at = std::max(now() + SimTime::from_seconds(d), not_before);
        blocks_.acquire(block);
        fanout_.push_back(Kernel::Delivery{at, to.value});
        latest = std::max(latest, at);
    }
    kernel_->post_batch(fanout_, EventKind::NewBlock, block.value);
    fanout_.clear();
    if (horizon_.size() <= block.value) horizon_.resize(block.value + 1);
    horizon_[block.value] = std::max(horizon_[block.value], latest);
}

void Network::broadcast_tx(NodeId origin, TxId tx)
{
    for (NodeId to : node_directory_.all()) {
        if (to == origin) continue;
        const double d = std::max(0.0, draw(propagation_rng_, params_.propagation.tx_delay));
        fanout_.push_back(Kernel::Delivery{now() + SimTime::from_seconds(d), to.value});
    }
    kernel_->post_batch(fanout_, EventKind::NewTransaction, tx.value);
    fanout_.clear();
}

SimTime Network::delivery_horizon(BlockId block) const
{
    return block.value < horizon_.size() ? horizon_[block.value] : SimTime{};
}

SimTime Network::mean_block_interval(const Node& n) const
{
    const double difficulty = blocks_.get(n.view.main_tip()).next_difficulty;
    const double share = n.miner->hash_rate / total_hash_rate_;
    return SimTime::from_seconds(params_.consensus.difficulty.target_spacing.seconds() * difficulty / share);
}

void Network::miner_schedule(Node& n)
{
    if (!n.miner) return;
    kernel_->cancel(n.miner->timer);
    n.miner->timer = EventHandle{};
    if (!mining_enabled_ || !(n.miner->hash_rate > 0.0)) return;
    const double mean = mean_block_interval(n).seconds();
    const double wait = draw(n.mining_rng, Distribution::exponential(mean));
    n.miner->timer = kernel_->schedule(now() + SimTime::from_seconds(wait), n.id.value, EventKind::MiningTimer);
}

Block Network::assemble_block(const Node& n)
{
    const ConsensusParams& cp = params_.consensus;
    const Block& parent = blocks_.get(n.view.main_tip());

    Block b;
    b.parent = parent.id;
    b.height = parent.height + 1;
    b.miner = n.id;
    b.created = now();
    b.difficulty = parent.next_difficulty;

    const std::uint32_t room = cp.max_block_size > kCoinbaseSize ? cp.max_block_size - kCoinbaseSize : 0;
    std::vector<TxId> picked = n.mempool.select(room, txs_, blocks_, n.view);
    std::uint32_t size = kCoinbaseSize;
    for (TxId tx : picked) {
        b.fees += txs_.fee(tx);
        size += txs_.size(tx);
    }
    const TxOutput reward{cp.block_subsidy + b.fees, n.id};
    const TxId coinbase = txs_.add(TxKind::Coinbase, n.id, now(), kCoinbaseSize, {}, std::span(&reward, 1));

    b.txs.reserve(picked.size() + 1);
    b.txs.push_back(coinbase);
    b.txs.insert(b.txs.end(), picked.begin(), picked.end());
    b.total_size = size;
    b.next_difficulty = difficulty_after(blocks_, b.parent, b.height, b.created, b.difficulty, cp.difficulty);
    return b;
}

BlockId Network::miner_on_win(Node& n)
{
    if (!n.miner) throw SimulationError(fmt::format("mining timer fired on non-miner {}", n.id.value));
    n.miner->timer = EventHandle{};
    Block b = assemble_block(n);
    n.manager->annotate(b);
    const BlockId id = blocks_.insert(std::move(b));
    if (horizon_.size() <= id.value) horizon_.resize(id.value + 1);
    ++n.miner->blocks_mined;
    ++stats_.blocks_mined;
    n.manager->on_mined(*this, n, id);
    if (!kernel_->is_pending(n.miner->timer)) miner_schedule(n);
    return id;
}

bool Network::touches(const Node& n, TxId tx) const
{
    for (const TxOutput& out : txs_.outputs(tx)) {
        if (out.recipient == n.id) return true;
    }
    for (const Outpoint& in : txs_.inputs(tx)) {
        if (txs_.output(in).recipient == n.id) return true;
    }
    return false;
}

bool Network::spent_in_view(const Node& n, Outpoint o) const
{
    bool spent = false;
    txs_.for_each_spender(o, [&](TxId s) {
        if (!spent) spent = n.mempool.contains(s) || is_confirmed(txs_, blocks_, n.view, s);
    });
    return spent;
}

Amount Network::supply_bound(const Node& n) const
{
    return genesis_supply_ + static_cast<Amount>(n.view.main_height()) * params_.consensus.block_subsidy;
}

AcceptResult Network::deliver_tx(Node& n, TxId tx)
{
    const AcceptResult r = n.mempool.add(tx, now(), txs_, blocks_, n.view);
    if (r != AcceptResult::Accepted) {
        if (r == AcceptResult::Conflict) ++n.stats.tx_rejected;
        return r;
    }
    ++n.stats.tx_accepted;
    if (n.wallet && touches(n, tx)) {
        const Amount added =
            n.wallet->credit(tx, std::nullopt, txs_, [&](Outpoint o) { return spent_in_view(n, o); });
        n.wallet->debit(tx, txs_);
        if (added > 0 && n.txgen && n.txgen->pending) txgen_try_emit(n);
    }
    return r;
}

void Network::apply_outcome(Node& n, const AddOutcome& outcome)
{
    if (outcome.kind == AddKind::OrphanBuffered) ++n.stats.orphans_buffered;
    if (outcome.kind == AddKind::Duplicate) ++n.stats.duplicate_blocks;
    if (!outcome.main_changed()) return;
    if (!outcome.reverted.empty()) {
        ++n.stats.reorgs;
        n.stats.max_reorg_depth = std::max<std::uint64_t>(n.stats.max_reorg_depth, outcome.reverted.size());
    }

    std::vector<TxId> reverted;
    for (auto it = outcome.reverted.rbegin(); it != outcome.reverted.rend(); ++it) {
        const auto& txs = blocks_.get(*it).txs;
        reverted.insert(reverted.end(), txs.begin(), txs.end());
    }
    const std::vector<TxId> applied = outcome.applied_txs(blocks_);
    const MempoolUpdate update = n.mempool.on_block(applied, reverted, now(), txs_, blocks_, n.view);
    n.stats.conflict_evicted += update.evicted.size() + update.dropped.size();

    if (n.wallet) wallet_on_block(n, outcome, update);
    if (n.miner) miner_schedule(n);
    if (n.txgen && n.txgen->pending) txgen_try_emit(n);
}

void Network::wallet_on_block(Node& n, const AddOutcome& outcome, const MempoolUpdate& update)
{
    Wallet& w = *n.wallet;
    const auto for_my_touches = [&](const Block& b, auto&& f) {
        auto lo = std::lower_bound(b.touches.begin(), b.touches.end(), n.id,
                                   [](const WalletTouch& t, NodeId id) { return t.node < id; });
        for (; lo != b.touches.end() && lo->node == n.id; ++lo) f(b.txs[lo->tx_index]);
    };
    const auto spent = [&](Outpoint o) { return spent_in_view(n, o); };

    for (BlockId id : outcome.reverted) {
        for_my_touches(blocks_.get(id), [&](TxId tx) {
            if (txs_.kind(tx) != TxKind::Regular) w.uncredit(tx, txs_);
        });
    }
    for (BlockId id : outcome.applied) {
        const Block& b = blocks_.get(id);
        for_my_touches(b, [&](TxId tx) {
            w.credit(tx, b.height, txs_, spent);
            w.debit(tx, txs_);
        });
    }
    for (TxId tx : update.reinserted) {
        if (touches(n, tx)) w.credit(tx, std::nullopt, txs_, spent);
    }
    for (const auto* gone : {&update.evicted, &update.dropped}) {
        for (TxId tx : *gone) {
            if (!touches(n, tx)) continue;
            w.uncredit(tx, txs_);
            wallet_restore_inputs(n, tx);
        }
    }
}

void Network::wallet_restore_inputs(Node& n, TxId tx)
{
    for (const Outpoint& o : txs_.inputs(tx)) {
        const TxOutput& out = txs_.output(o);
        if (out.recipient != n.id) continue;
        const std::optional<std::uint32_t> height = confirmed_height(txs_, blocks_, n.view, o.tx);
        if (!height && !n.mempool.contains(o.tx)) continue;
        if (spent_in_view(n, o)) continue;
        n.wallet->restore(UtxoRecord{o, out.value, height, txs_.kind(o.tx) == TxKind::Coinbase, false});
    }
}

void Network::schedule_txgen(Node& n)
{
    const double wait = draw(n.txgen_rng, Distribution::exponential(n.txgen->config.mean_interval));
    kernel_->schedule(now() + SimTime::from_seconds(wait), n.id.value, EventKind::TxGenTimer);
}

std::optional<TxId> Network::txgen_tick(Node& n)
{
    if (!n.txgen) throw SimulationError(fmt::format("generator timer fired on node {} without generator", n.id.value));
    TxGenState& g = *n.txgen;
    if (!g.pending) {
        PendingPayment p;
        p.amount = std::max<Amount>(0, std::llround(draw(n.txgen_rng, g.config.amount)));
        p.fee_rate = std::max(0.0, draw(n.txgen_rng, g.config.fee_rate));
        const auto k = std::max<long long>(1, std::llround(draw(n.txgen_rng, g.config.recipients)));
        for (long long i = 0; i < k; ++i) {
            const NodeId to = wallet_directory_.random_other(n.txgen_rng, n.id);
            if (!to.valid()) throw SimulationError("transaction generator has no recipient");
            p.recipients.push_back(to);
        }
        g.pending = std::move(p);
    }
    return txgen_try_emit(n);
}

std::optional<TxId> Network::txgen_try_emit(Node& n)
{
    TxGenState& g = *n.txgen;
    if (!g.pending) return std::nullopt;
    PendingPayment& p = *g.pending;
    Wallet& w = *n.wallet;
    const std::uint32_t height = n.view.main_height();
    const std::uint32_t min_conf = g.config.min_confirmations;
    const auto k = static_cast<std::uint32_t>(p.recipients.size());
    const Amount need = p.amount + fee_for(p.fee_rate, estimate_tx_size(1, k + 1));

    const auto defer = [&] {
        if (!p.deferred) {
            p.deferred = true;
            ++g.deferred;
        }
        return std::nullopt;
    };

    if (w.balance(min_conf, height) < need) {
        if (need > supply_bound(n)) {
            ++g.unfundable;
            g.pending.reset();
            schedule_txgen(n);
            return std::nullopt;
        }
        return defer();
    }

    const PaymentRequest req{p.amount, p.fee_rate, p.recipients, n.id, params_.dust_threshold};
    const std::optional<PaymentPlan> plan = plan_payment(w, min_conf, height, req);
    if (!plan) return defer();

    std::vector<Outpoint> inputs;
    inputs.reserve(plan->inputs.size());
    for (const UtxoRecord& u : plan->inputs) inputs.push_back(u.outpoint);
    const TxId tx = txs_.add(TxKind::Regular, n.id, now(), plan->size, inputs, plan->outputs);

    const AcceptResult r = n.mempool.add(tx, now(), txs_, blocks_, n.view);
    if (r != AcceptResult::Accepted) {
        throw SimulationError(fmt::format("node {} rejected its own transaction: {}", n.id.value, to_string(r)));
    }
    w.debit(tx, txs_);
    w.credit(tx, std::nullopt, txs_, [](Outpoint) { return false; });
    broadcast_tx(n.id, tx);

    ++g.generated;
    ++stats_.tx_generated;
    g.pending.reset();
    schedule_txgen(n);
    return tx;
}

std::size_t Network::cleanup()
{
    std::vector<BlockId> roots;
    for (auto& n : nodes_) {
        n->view.prune_side_tips(params_.retention_depth);
        n->view.collect_retained(roots);
    }
    const std::size_t pruned = blocks_.cleanup(roots);
    stats_.blocks_pruned += pruned;
    ++stats_.cleanups;
    return pruned;
}

void Network::sample()
{
    stats_.sample_times.push_back(now());
    std::vector<std::uint32_t> sizes;
    sizes.reserve(nodes_.size());
    for (const auto& n : nodes_) sizes.push_back(static_cast<std::uint32_t>(n->mempool.size()));
    stats_.mempool_samples.push_back(std::move(sizes));
    stats_.peak_memory_estimate = std::max(stats_.peak_memory_estimate, memory_estimate());
}

std::size_t Network::memory_estimate() const
{
    std::size_t bytes = txs_.memory_bytes() + blocks_.memory_bytes() + kernel_->queued() * sizeof(Event);
    for (const auto& n : nodes_) {
        bytes += n->view.memory_bytes() + n->mempool.memory_bytes();
        if (n->wallet) bytes += n->wallet->memory_bytes();
    }
    return bytes;
}

void Network::stop_mining()
{
    mining_enabled_ = false;
    for (auto& n : nodes_) {
        if (n->miner) {
            kernel_->cancel(n->miner->timer);
            n->miner->timer = EventHandle{};
        }
    }
}

void Network::check_invariants()
{
    for (std::string& v : check_network(*this)) stats_.invariant_violations.push_back(std::move(v));
    if (!stats_.invariant_violations.empty()) {
        throw SimulationError(fmt::format("invariant violated at {}: {}", format_duration(now()),
                                          stats_.invariant_violations.front()));
    }
}

} // namespace chainsim
