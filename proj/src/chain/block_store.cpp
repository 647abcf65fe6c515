#include <chainsim/chain/block_store.hpp>

#include <chainsim/kernel/kernel.hpp>

#include <algorithm>

#include <fmt/format.h>

namespace chainsim {

BlockId BlockStore::insert_genesis(Block block)
{
    if (!blocks_.empty()) throw SimulationError("genesis inserted twice");
    if (block.parent.valid() || block.height != 0) throw SimulationError("genesis must be a parentless height-0 block");
    block.id = BlockId{0};
    index(block);
    genesis_ = block.id;
    blocks_.emplace_back(std::move(block));
    refs_.push_back(0);
    ++live_;
    return genesis_;
}

BlockId BlockStore::insert(Block block)
{
    if (blocks_.empty()) throw SimulationError("block inserted before genesis");
    const BlockId id = next_id();
    if (block.parent == id) throw SimulationError(fmt::format("block {} references itself", id.value));
    if (!contains(block.parent)) {
        throw SimulationError(fmt::format("block {} has unknown parent {}", id.value, block.parent.value));
    }
    const Block& parent = get(block.parent);
    if (block.height != parent.height + 1) {
        throw SimulationError(fmt::format("block {} height {} inconsistent with parent height {}", id.value,
                                          block.height, parent.height));
    }
    if (block.txs.empty() || txs_->kind(block.txs.front()) != TxKind::Coinbase) {
        throw SimulationError(fmt::format("block {} does not start with a coinbase", id.value));
    }
    std::uint32_t size = 0;
    for (std::size_t i = 0; i < block.txs.size(); ++i) {
        if (i > 0 && txs_->kind(block.txs[i]) != TxKind::Regular) {
            throw SimulationError(fmt::format("block {} has a non-regular transaction at position {}", id.value, i));
        }
        size += txs_->size(block.txs[i]);
    }
    if (size != block.total_size) {
        throw SimulationError(fmt::format("block {} declares size {} but contains {}", id.value, block.total_size, size));
    }
    block.id = id;
    index(block);
    blocks_.emplace_back(std::move(block));
    refs_.push_back(0);
    ++live_;
    return id;
}

void BlockStore::index(Block& block)
{
    block.touches.clear();
    for (std::uint32_t i = 0; i < block.txs.size(); ++i) {
        const TxId tx = block.txs[i];
        txs_->add_inclusion(tx, block.id);
        const std::size_t mark = block.touches.size();
        const auto touch = [&](NodeId n) {
            for (std::size_t k = mark; k < block.touches.size(); ++k) {
                if (block.touches[k].node == n) return;
            }
            block.touches.push_back({n, i});
        };
        for (const TxOutput& out : txs_->outputs(tx)) touch(out.recipient);
        for (const Outpoint& in : txs_->inputs(tx)) touch(txs_->output(in).recipient);
    }
    std::sort(block.touches.begin(), block.touches.end(), [](const WalletTouch& a, const WalletTouch& b) {
        return a.node != b.node ? a.node < b.node : a.tx_index < b.tx_index;
    });
}

const Block& BlockStore::get(BlockId id) const
{
    if (!contains(id)) throw SimulationError(fmt::format("block {} not in store", id.value));
    return *blocks_[id.value];
}

BlockId BlockStore::ancestor(BlockId id, std::uint32_t height) const
{
    const Block* b = &get(id);
    if (height > b->height) throw SimulationError("ancestor height above block height");
    while (b->height > height) b = &get(b->parent);
    return b->id;
}

BlockId BlockStore::fork_point(BlockId a, BlockId b) const
{
    const Block* x = &get(a);
    const Block* y = &get(b);
    while (x->height > y->height) x = &get(x->parent);
    while (y->height > x->height) y = &get(y->parent);
    while (x->id != y->id) {
        x = &get(x->parent);
        y = &get(y->parent);
    }
    return x->id;
}

void BlockStore::acquire(BlockId id)
{
    ++refs_[id.value];
}

void BlockStore::release(BlockId id)
{
    if (refs_[id.value] == 0) throw SimulationError("block reference released twice");
    --refs_[id.value];
}

std::size_t BlockStore::cleanup(std::span<const BlockId> retained)
{
    std::vector<bool> marked(blocks_.size(), false);
    const auto mark_from = [&](BlockId id) {
        while (id.valid() && contains(id) && !marked[id.value]) {
            marked[id.value] = true;
            id = blocks_[id.value]->parent;
        }
    };
    mark_from(genesis_);
    for (BlockId id : retained) mark_from(id);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i] && refs_[i] > 0) mark_from(BlockId{static_cast<std::uint32_t>(i)});
    }

    std::size_t pruned = 0;
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (!blocks_[i] || marked[i]) continue;
        for (TxId tx : blocks_[i]->txs) txs_->remove_inclusion(tx, blocks_[i]->id);
        blocks_[i].reset();
        --live_;
        ++pruned;
    }
    return pruned;
}

std::size_t BlockStore::memory_bytes() const
{
    std::size_t bytes = blocks_.capacity() * sizeof(std::optional<Block>) + refs_.capacity() * sizeof(std::uint32_t);
    for (const auto& b : blocks_) {
        if (b) bytes += b->txs.capacity() * sizeof(TxId) + b->touches.capacity() * sizeof(WalletTouch);
    }
    return bytes;
}

} // namespace chainsim
