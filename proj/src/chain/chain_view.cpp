#include <chainsim/chain/chain_view.hpp>

#include <chainsim/kernel/kernel.hpp>

#include <algorithm>
#include <deque>

#include <fmt/format.h>

namespace chainsim {

const char* to_string(AddKind kind)
{
    switch (kind) {
    case AddKind::ExtendedMain: return "extended-main";
    case AddKind::CreatedFork: return "created-fork";
    case AddKind::Reorganized: return "reorganized";
    case AddKind::Duplicate: return "duplicate";
    case AddKind::OrphanBuffered: return "orphan-buffered";
    }
    return "?";
}

std::vector<TxId> AddOutcome::reverted_txs(const BlockStore& store) const
{
    std::vector<TxId> out;
    for (BlockId b : reverted) {
        const auto& txs = store.get(b).txs;
        out.insert(out.end(), txs.begin(), txs.end());
    }
    return out;
}

std::vector<TxId> AddOutcome::applied_txs(const BlockStore& store) const
{
    std::vector<TxId> out;
    for (BlockId b : applied) {
        const auto& txs = store.get(b).txs;
        out.insert(out.end(), txs.begin(), txs.end());
    }
    return out;
}

ChainView::ChainView(NodeId owner, const BlockStore& store) : owner_(owner), store_(&store)
{
    const BlockId genesis = store.genesis();
    main_.push_back(genesis);
    tips_.push_back(genesis);
    known_.resize(genesis.value + 1, false);
    known_[genesis.value] = true;
}

bool ChainView::on_main_chain(BlockId id) const
{
    if (!store_->contains(id)) return false;
    return on_main_chain(id, store_->get(id).height);
}

void ChainView::connect(BlockId id, BlockId& best)
{
    const Block& b = store_->get(id);
    if (known_.size() <= id.value) known_.resize(id.value + 1, false);
    known_[id.value] = true;
    auto it = std::find(tips_.begin(), tips_.end(), b.parent);
    if (it != tips_.end()) {
        *it = id;
    } else {
        tips_.push_back(id);
    }
    if (b.height > store_->get(best).height) best = id;
}

AddOutcome ChainView::add_block(BlockId id)
{
    AddOutcome outcome;
    if (knows(id) || orphan_ids_.contains(id)) {
        outcome.kind = AddKind::Duplicate;
        return outcome;
    }
    const Block& block = store_->get(id);
    if (block.is_genesis()) {
        outcome.kind = AddKind::Duplicate;
        return outcome;
    }
    if (!knows(block.parent)) {
        orphans_[block.parent].push_back(id);
        orphan_ids_.insert(id);
        outcome.kind = AddKind::OrphanBuffered;
        return outcome;
    }
    if (!store_->contains(block.parent)) {
        throw SimulationError(fmt::format("node {}: parent {} of block {} was pruned", owner_.value,
                                          block.parent.value, id.value));
    }

    const BlockId old_tip = main_tip();
    BlockId best = old_tip;
    std::deque<BlockId> pending{id};
    while (!pending.empty()) {
        const BlockId next = pending.front();
        pending.pop_front();
        connect(next, best);
        ++outcome.connected;
        auto it = orphans_.find(next);
        if (it == orphans_.end()) continue;
        for (BlockId child : it->second) {
            orphan_ids_.erase(child);
            pending.push_back(child);
        }
        orphans_.erase(it);
    }

    if (best == old_tip) {
        outcome.kind = AddKind::CreatedFork;
        return outcome;
    }

    const BlockId fork = store_->fork_point(old_tip, best);
    const std::uint32_t fork_height = store_->get(fork).height;
    for (std::size_t h = main_.size() - 1; h > fork_height; --h) outcome.reverted.push_back(main_[h]);
    for (BlockId cur = best; cur != fork; cur = store_->get(cur).parent) outcome.applied.push_back(cur);
    std::reverse(outcome.applied.begin(), outcome.applied.end());

    main_.resize(fork_height + 1);
    main_.insert(main_.end(), outcome.applied.begin(), outcome.applied.end());
    outcome.kind = outcome.reverted.empty() ? AddKind::ExtendedMain : AddKind::Reorganized;
    return outcome;
}

void ChainView::prune_side_tips(std::uint32_t depth)
{
    const BlockId tip = main_tip();
    const std::uint32_t height = main_height();
    std::erase_if(tips_, [&](BlockId t) {
        if (t == tip) return false;
        if (!store_->contains(t)) return true;
        return store_->get(t).height + depth <= height;
    });
}

void ChainView::collect_retained(std::vector<BlockId>& out) const
{
    out.insert(out.end(), tips_.begin(), tips_.end());
    out.insert(out.end(), orphan_ids_.begin(), orphan_ids_.end());
}

std::size_t ChainView::memory_bytes() const
{
    return sizeof(*this) + main_.capacity() * sizeof(BlockId) + tips_.capacity() * sizeof(BlockId) +
           known_.capacity() / 8 + orphan_ids_.size() * 64;
}

} // namespace chainsim
