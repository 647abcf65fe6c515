#pragma once

#include <chainsim/node/network.hpp>

#include <deque>
#include <span>
#include <vector>

namespace chainsim {

/// Withholding strategy. The node's own view is its private chain; blocks it
/// mines stay unpublished until honest progress forces a reaction:
///   lead before the honest block <= 0: adopt the public chain
///   lead 1: publish the matching block (a tie race)
///   lead 2: publish everything and win
///   lead > 2: publish the block matching the new public height
/// A block mined during a race is published at once. Tie-creating
/// publications are released only after every honest node has the honest
/// block, so honest miners never build on the attacker's side of a tie.
class SelfishChainManager final : public ChainManager {
public:
    void on_mined(Network& net, Node& node, BlockId block) override;
    void on_received(Network& net, Node& node, BlockId block) override;
    void on_publish(Network& net, Node& node, std::uint64_t data) override;
    void annotate(Block& block) override;
    bool honest() const override { return false; }

    std::size_t unpublished() const { return unpublished_.size(); }
    std::uint32_t public_height() const { return public_height_; }
    bool racing() const { return race_; }
    std::uint32_t episodes_started() const { return episodes_; }
    std::uint64_t adoptions() const { return adoptions_; }

private:
    void publish(Network& net, Node& node, std::size_t count, bool deferred, BlockId honest_block);
    void release(Network& net, Node& node, std::vector<BlockId> blocks);

    std::deque<BlockId> unpublished_;
    std::vector<BlockId> pending_; // published but waiting for the delivery horizon
    bool publish_scheduled_ = false;
    std::uint32_t public_height_ = 0;
    bool race_ = false;
    std::uint32_t episodes_ = 0;
    std::uint64_t adoptions_ = 0;
};

struct AttackSummary {
    std::uint64_t chain_blocks = 0;    // final chain, genesis excluded
    std::uint64_t attacker_blocks = 0; // blocks mined by the attacker in the final chain
    std::uint64_t withheld_blocks = 0; // of those, blocks that were withheld
    std::uint64_t episodes = 0;        // distinct withholding episodes with a block in the final chain

    double attacker_share() const
    {
        return chain_blocks == 0 ? 0.0 : static_cast<double>(attacker_blocks) / static_cast<double>(chain_blocks);
    }
};

AttackSummary summarize_attack(const BlockStore& store, std::span<const BlockId> chain, NodeId attacker);

} // namespace chainsim
