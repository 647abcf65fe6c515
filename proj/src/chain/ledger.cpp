#include <chainsim/chain/ledger.hpp>

#include <vector>

namespace chainsim {

BlockId make_genesis(TxStore& txs, BlockStore& store, std::span<const TxOutput> allocations,
                     double initial_difficulty)
{
    std::vector<TxOutput> outputs;
    for (const TxOutput& out : allocations) {
        if (out.value > 0) outputs.push_back(out);
    }
    const TxId alloc = txs.add(TxKind::Allocation, NodeId{}, SimTime{},
                               estimate_tx_size(0, static_cast<std::uint32_t>(outputs.size())), {}, outputs);
    Block genesis;
    genesis.height = 0;
    genesis.txs = {alloc};
    genesis.total_size = txs.size(alloc);
    genesis.difficulty = initial_difficulty;
    genesis.next_difficulty = initial_difficulty;
    return store.insert_genesis(std::move(genesis));
}

std::optional<std::uint32_t> confirmed_height(const TxStore& txs, const BlockStore& store, const ChainView& view,
                                              TxId tx)
{
    std::optional<std::uint32_t> result;
    txs.for_each_inclusion(tx, [&](BlockId b) {
        if (result) return;
        const std::uint32_t h = store.get(b).height;
        if (view.on_main_chain(b, h)) result = h;
    });
    return result;
}

bool spent_on_main(const TxStore& txs, const BlockStore& store, const ChainView& view, Outpoint o, TxId ignore)
{
    bool spent = false;
    txs.for_each_spender(o, [&](TxId s) {
        if (spent || s == ignore) return;
        if (is_confirmed(txs, store, view, s)) spent = true;
    });
    return spent;
}

} // namespace chainsim
