#pragma once

#include <chainsim/chain/block_store.hpp>
#include <chainsim/chain/chain_view.hpp>
#include <chainsim/chain/transaction.hpp>

#include <optional>
#include <span>

namespace chainsim {

/// Creates the height-0 block carrying one allocation output per entry
/// (zero-value entries are skipped) and inserts it into the store.
BlockId make_genesis(TxStore& txs, BlockStore& store, std::span<const TxOutput> allocations,
                     double initial_difficulty);

/// Height of the block confirming `tx` on the view's main chain, if any.
std::optional<std::uint32_t> confirmed_height(const TxStore& txs, const BlockStore& store, const ChainView& view,
                                              TxId tx);

inline bool is_confirmed(const TxStore& txs, const BlockStore& store, const ChainView& view, TxId tx)
{
    return confirmed_height(txs, store, view, tx).has_value();
}

/// True if some transaction confirmed on the view's main chain spends `o`.
bool spent_on_main(const TxStore& txs, const BlockStore& store, const ChainView& view, Outpoint o,
                   TxId ignore = TxId{});

} // namespace chainsim
