#include <chainsim/selfish/selfish_manager.hpp>

#include <algorithm>
#include <set>

namespace chainsim {

void SelfishChainManager::annotate(Block& block)
{
    if (unpublished_.empty() && !race_) ++episodes_;
    block.withheld = true;
    block.episode = episodes_;
}

void SelfishChainManager::on_mined(Network& net, Node& node, BlockId block)
{
    net.apply_outcome(node, node.view.add_block(block));
    unpublished_.push_back(block);
    if (race_) {
        publish(net, node, unpublished_.size(), false, BlockId{});
        race_ = false;
    }
}

void SelfishChainManager::on_received(Network& net, Node& node, BlockId block)
{
    const std::uint32_t private_height = node.view.main_height();
    const AddOutcome outcome = node.view.add_block(block);

    std::uint32_t seen = 0;
    if (outcome.kind != AddKind::OrphanBuffered && outcome.kind != AddKind::Duplicate) {
        seen = net.blocks().get(block).height;
    }
    for (BlockId id : outcome.applied) seen = std::max(seen, net.blocks().get(id).height);

    net.apply_outcome(node, outcome);
    if (seen <= public_height_) return;

    const long long lead = static_cast<long long>(private_height) - static_cast<long long>(public_height_);
    public_height_ = seen;

    if (lead <= 0) {
        if (!unpublished_.empty()) ++adoptions_;
        unpublished_.clear();
        race_ = false;
    } else if (lead == 1) {
        publish(net, node, unpublished_.size(), true, block);
        race_ = true;
    } else if (lead == 2) {
        publish(net, node, unpublished_.size(), false, block);
        race_ = false;
    } else {
        publish(net, node, 1, true, block);
    }
}

void SelfishChainManager::publish(Network& net, Node& node, std::size_t count, bool deferred, BlockId honest_block)
{
    count = std::min(count, unpublished_.size());
    std::vector<BlockId> batch(unpublished_.begin(), unpublished_.begin() + static_cast<std::ptrdiff_t>(count));
    unpublished_.erase(unpublished_.begin(), unpublished_.begin() + static_cast<std::ptrdiff_t>(count));
    for (BlockId b : batch) public_height_ = std::max(public_height_, net.blocks().get(b).height);

    if (!deferred && pending_.empty()) {
        release(net, node, std::move(batch));
        return;
    }
    // Keep in-flight publications ordered behind any earlier deferred batch.
    for (BlockId b : batch) {
        net.blocks().acquire(b);
        pending_.push_back(b);
    }
    if (!publish_scheduled_) {
        SimTime at = net.now();
        if (honest_block.valid()) at = std::max(at, net.delivery_horizon(honest_block));
        net.kernel().schedule(at, node.id.value, EventKind::Publish);
        publish_scheduled_ = true;
    }
}

void SelfishChainManager::on_publish(Network& net, Node& node, std::uint64_t)
{
    publish_scheduled_ = false;
    std::vector<BlockId> batch;
    batch.swap(pending_);
    for (BlockId b : batch) net.blocks().release(b);
    release(net, node, std::move(batch));
}

void SelfishChainManager::release(Network& net, Node& node, std::vector<BlockId> blocks)
{
    for (BlockId b : blocks) net.broadcast_block(node.id, b);
}

AttackSummary summarize_attack(const BlockStore& store, std::span<const BlockId> chain, NodeId attacker)
{
    AttackSummary s;
    std::set<std::uint32_t> episodes;
    for (BlockId id : chain) {
        const Block& b = store.get(id);
        if (b.is_genesis()) continue;
        ++s.chain_blocks;
        if (b.miner != attacker) continue;
        ++s.attacker_blocks;
        if (b.withheld) {
            ++s.withheld_blocks;
            episodes.insert(b.episode);
        }
    }
    s.episodes = episodes.size();
    return s;
}

} // namespace chainsim
