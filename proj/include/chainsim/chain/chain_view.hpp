#pragma once

#include <chainsim/chain/block_store.hpp>

#include <map>
#include <set>
#include <span>
#include <vector>

namespace chainsim {

enum class AddKind : std::uint8_t {
    ExtendedMain,
    CreatedFork,
    Reorganized,
    Duplicate,
    OrphanBuffered,
};

const char* to_string(AddKind kind);

/// Net main-chain change caused by delivering one block, including any
/// buffered orphans the delivery released.
struct AddOutcome {
    AddKind kind = AddKind::Duplicate;
    std::vector<BlockId> reverted; // blocks leaving the main chain, tip first
    std::vector<BlockId> applied;  // blocks joining the main chain, in height order
    std::size_t connected = 0;     // blocks newly linked into this view

    bool main_changed() const { return !applied.empty() || !reverted.empty(); }
    std::size_t reorg_depth() const { return reverted.size(); }

    std::vector<TxId> reverted_txs(const BlockStore& store) const;
    std::vector<TxId> applied_txs(const BlockStore& store) const;
};

/// One node's view of the block tree: its branch tips and selected main
/// chain. Longest chain wins; equal height keeps the incumbent (first seen).
class ChainView {
public:
    ChainView(NodeId owner, const BlockStore& store);

    AddOutcome add_block(BlockId id);

    NodeId owner() const { return owner_; }
    BlockId main_tip() const { return main_.back(); }
    std::uint32_t main_height() const { return static_cast<std::uint32_t>(main_.size() - 1); }
    std::span<const BlockId> main_chain() const { return main_; }

    bool on_main_chain(BlockId id, std::uint32_t height) const
    {
        return height < main_.size() && main_[height] == id;
    }
    bool on_main_chain(BlockId id) const;

    bool knows(BlockId id) const { return id.value < known_.size() && known_[id.value]; }
    const std::vector<BlockId>& tips() const { return tips_; }
    std::size_t orphan_count() const { return orphan_ids_.size(); }

    /// Drops side-branch tips at least `depth` blocks below the main tip.
    void prune_side_tips(std::uint32_t depth);

    /// Appends the blocks this view needs kept in the store (tips and orphans).
    void collect_retained(std::vector<BlockId>& out) const;

    std::size_t memory_bytes() const;

private:
    void connect(BlockId id, BlockId& best);

    NodeId owner_;
    const BlockStore* store_;
    std::vector<BlockId> main_; // indexed by height
    std::vector<BlockId> tips_;
    std::vector<bool> known_;
    std::map<BlockId, std::vector<BlockId>> orphans_; // missing parent -> children
    std::set<BlockId> orphan_ids_;
};

} // namespace chainsim
