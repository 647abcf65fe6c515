#pragma once

#include <chainsim/chain/ids.hpp>
#include <chainsim/chain/transaction.hpp>
#include <chainsim/kernel/sim_time.hpp>

#include <optional>
#include <span>
#include <vector>

namespace chainsim {

/// (node, transaction position) pairs for wallets affected by a block.
struct WalletTouch {
    NodeId node;
    std::uint32_t tx_index = 0;
};

struct Block {
    BlockId id;
    BlockId parent;          // invalid only for genesis
    std::uint32_t height = 0;
    NodeId miner;            // invalid for genesis
    SimTime created;
    std::vector<TxId> txs;   // coinbase (or genesis allocation) first
    std::uint32_t total_size = 0;
    double difficulty = 1.0;      // difficulty this block was mined at
    double next_difficulty = 1.0; // difficulty for children of this block
    Amount fees = 0;              // fees collected by the coinbase
    bool withheld = false;        // mined privately by a withholding strategy
    std::uint32_t episode = 0;    // withholding episode, 0 when not withheld
    std::vector<WalletTouch> touches; // sorted by node, then tx position

    bool is_genesis() const { return !parent.valid(); }
};

/// The global deduplicated block tree. Chain views hold block ids only;
/// cleanup prunes every block that is not an ancestor of a retained root.
class BlockStore {
public:
    explicit BlockStore(TxStore& txs) : txs_(&txs) {}

    /// Inserts the tree root. Must be called exactly once, first.
    BlockId insert_genesis(Block block);

    /// Assigns an id, checks linkage (parent stored, height = parent + 1) and
    /// indexes the block's transactions. Throws SimulationError on violations.
    BlockId insert(Block block);

    BlockId next_id() const { return BlockId{static_cast<std::uint32_t>(blocks_.size())}; }
    BlockId genesis() const { return genesis_; }

    bool contains(BlockId id) const { return id.valid() && id.value < blocks_.size() && blocks_[id.value].has_value(); }
    const Block& get(BlockId id) const;

    std::size_t live_count() const { return live_; }
    std::size_t inserted_count() const { return blocks_.size(); }

    /// Highest common ancestor of two stored blocks.
    BlockId fork_point(BlockId a, BlockId b) const;

    /// Ancestor of `id` at `height` (must be <= height of id).
    BlockId ancestor(BlockId id, std::uint32_t height) const;

    /// In-flight references keep a block (and its ancestors) alive across cleanup.
    void acquire(BlockId id);
    void release(BlockId id);
    std::uint32_t references(BlockId id) const { return id.value < refs_.size() ? refs_[id.value] : 0; }

    /// Removes every block that is neither an ancestor-or-self of a retained
    /// root nor referenced. Genesis is never pruned. Returns the pruned count.
    std::size_t cleanup(std::span<const BlockId> retained);

    template <class F>
    void for_each(F&& f) const
    {
        for (const auto& b : blocks_) {
            if (b) f(*b);
        }
    }

    std::size_t memory_bytes() const;

private:
    void index(Block& block);

    TxStore* txs_;
    std::vector<std::optional<Block>> blocks_;
    std::vector<std::uint32_t> refs_;
    BlockId genesis_;
    std::size_t live_ = 0;
};

} // namespace chainsim
