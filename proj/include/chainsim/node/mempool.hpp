#pragma once

#include <chainsim/chain/block_store.hpp>
#include <chainsim/chain/chain_view.hpp>
#include <chainsim/chain/transaction.hpp>

#include <span>
#include <vector>

namespace chainsim {

struct MempoolEntry {
    TxId tx;
    SimTime arrival;
    Amount fee = 0;
    std::uint32_t size = 1;
};

/// Mempool order: fee-rate (fee/size) descending, then arrival, then id.
bool mempool_before(const MempoolEntry& a, const MempoolEntry& b);

enum class AcceptResult : std::uint8_t {
    Accepted,
    Duplicate,
    Conflict,         // an input is spent by the mempool or the main chain
    AlreadyConfirmed, // already on this node's main chain
    NotRelayable,     // coinbase or allocation
};

const char* to_string(AcceptResult r);

/// Effect of a main-chain change on a mempool.
struct MempoolUpdate {
    std::vector<TxId> removed;    // confirmed by applied blocks
    std::vector<TxId> evicted;    // conflicted with applied blocks (with descendants)
    std::vector<TxId> reinserted; // reverted and back in the mempool
    std::vector<TxId> dropped;    // reverted but now conflicting
};

/// One node's unconfirmed transactions. Membership is a bitset over the
/// run-wide transaction ids; ordering is materialized on demand.
class Mempool {
public:
    explicit Mempool(NodeId owner) : owner_(owner) {}

    /// First arrival wins: later spends of an outpoint already spent by the
    /// mempool or the main chain are rejected.
    AcceptResult add(TxId tx, SimTime arrival, const TxStore& txs, const BlockStore& blocks, const ChainView& view);

    bool contains(TxId tx) const
    {
        const std::size_t w = tx.value >> 6;
        return w < present_.size() && ((present_[w] >> (tx.value & 63)) & 1u);
    }
    bool remove(TxId tx);
    std::size_t size() const { return live_; }
    bool empty() const { return live_ == 0; }

    /// Entries in mempool order.
    std::vector<MempoolEntry> ordered(const TxStore& txs) const;

    /// Greedy block template: scans in mempool order, taking each transaction
    /// that fits the remaining capacity and whose inputs are confirmed on the
    /// main chain or created by an already selected transaction.
    std::vector<TxId> select(std::uint32_t max_size, const TxStore& txs, const BlockStore& blocks,
                             const ChainView& view) const;

    /// Apply a main-chain change (view already updated). `applied` in chain
    /// order; `reverted` in chain order (oldest first).
    MempoolUpdate on_block(std::span<const TxId> applied, std::span<const TxId> reverted, SimTime now,
                           const TxStore& txs, const BlockStore& blocks, const ChainView& view);

    std::size_t memory_bytes() const
    {
        return present_.capacity() * sizeof(std::uint64_t) + ever_.capacity() * sizeof(std::uint64_t) +
               slots_.capacity() * sizeof(Slot);
    }

private:
    struct Slot {
        TxId tx;
        SimTime arrival;
    };

    void evict_with_descendants(TxId root, const TxStore& txs, std::vector<TxId>& out);
    void compact();
    static void set_bit(std::vector<std::uint64_t>& bits, TxId tx);

    NodeId owner_;
    std::vector<std::uint64_t> present_;
    std::vector<std::uint64_t> ever_;
    std::vector<Slot> slots_;
    std::size_t live_ = 0;
    std::size_t stale_ = 0;
};

} // namespace chainsim
