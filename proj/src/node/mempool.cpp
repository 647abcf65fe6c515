#include <chainsim/node/mempool.hpp>

#include <chainsim/chain/ledger.hpp>

#include <algorithm>
#include <queue>
#include <unordered_map>

namespace chainsim {

bool mempool_before(const MempoolEntry& a, const MempoolEntry& b)
{
    using Wide = __int128;
    const Wide lhs = static_cast<Wide>(a.fee) * b.size;
    const Wide rhs = static_cast<Wide>(b.fee) * a.size;
    if (lhs != rhs) return lhs > rhs;
    if (a.arrival != b.arrival) return a.arrival < b.arrival;
    return a.tx < b.tx;
}

const char* to_string(AcceptResult r)
{
    switch (r) {
    case AcceptResult::Accepted: return "accepted";
    case AcceptResult::Duplicate: return "duplicate";
    case AcceptResult::Conflict: return "conflict";
    case AcceptResult::AlreadyConfirmed: return "already-confirmed";
    case AcceptResult::NotRelayable: return "not-relayable";
    }
    return "?";
}

void Mempool::set_bit(std::vector<std::uint64_t>& bits, TxId tx)
{
    const std::size_t w = tx.value >> 6;
    if (w >= bits.size()) bits.resize(w + 1, 0);
    bits[w] |= std::uint64_t{1} << (tx.value & 63);
}

AcceptResult Mempool::add(TxId tx, SimTime arrival, const TxStore& txs, const BlockStore& blocks,
                          const ChainView& view)
{
    if (contains(tx)) return AcceptResult::Duplicate;
    const TxRecord& rec = txs.record(tx);
    if (rec.kind != TxKind::Regular) return AcceptResult::NotRelayable;
    if (rec.first_block.valid() && is_confirmed(txs, blocks, view, tx)) return AcceptResult::AlreadyConfirmed;
    if (rec.conflicted) {
        for (const Outpoint& o : txs.inputs(tx)) {
            bool clash = false;
            txs.for_each_spender(o, [&](TxId s) {
                if (clash || s == tx) return;
                clash = contains(s) || is_confirmed(txs, blocks, view, s);
            });
            if (clash) return AcceptResult::Conflict;
        }
    }

    const std::size_t w = tx.value >> 6;
    const bool seen_before = w < ever_.size() && ((ever_[w] >> (tx.value & 63)) & 1u);
    if (seen_before && stale_ > 0) compact();
    set_bit(present_, tx);
    set_bit(ever_, tx);
    slots_.push_back({tx, arrival});
    ++live_;
    return AcceptResult::Accepted;
}

bool Mempool::remove(TxId tx)
{
    if (!contains(tx)) return false;
    present_[tx.value >> 6] &= ~(std::uint64_t{1} << (tx.value & 63));
    --live_;
    ++stale_;
    if (stale_ > 4096 && stale_ > live_) compact();
    return true;
}

void Mempool::compact()
{
    std::erase_if(slots_, [this](const Slot& s) { return !contains(s.tx); });
    stale_ = 0;
}

std::vector<MempoolEntry> Mempool::ordered(const TxStore& txs) const
{
    std::vector<MempoolEntry> out;
    out.reserve(live_);
    for (const Slot& s : slots_) {
        if (!contains(s.tx)) continue;
        const TxRecord& r = txs.record(s.tx);
        out.push_back({s.tx, s.arrival, r.fee, r.size});
    }
    std::sort(out.begin(), out.end(), mempool_before);
    return out;
}

std::vector<TxId> Mempool::select(std::uint32_t max_size, const TxStore& txs, const BlockStore& blocks,
                                  const ChainView& view) const
{
    const std::vector<MempoolEntry> entries = ordered(txs);
    const std::size_t n = entries.size();
    std::unordered_map<std::uint32_t, std::uint32_t> position;
    position.reserve(n * 2);
    for (std::uint32_t i = 0; i < n; ++i) position.emplace(entries[i].tx.value, i);

    std::vector<std::uint32_t> waiting(n, 0);
    std::vector<bool> blocked(n, false);
    std::vector<std::vector<std::uint32_t>> children(n);
    std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> eligible;

    for (std::uint32_t i = 0; i < n; ++i) {
        std::vector<std::uint32_t> parents;
        for (const Outpoint& o : txs.inputs(entries[i].tx)) {
            auto it = position.find(o.tx.value);
            if (it != position.end()) {
                if (std::find(parents.begin(), parents.end(), it->second) == parents.end()) {
                    parents.push_back(it->second);
                }
            } else if (!is_confirmed(txs, blocks, view, o.tx)) {
                blocked[i] = true;
            }
        }
        if (blocked[i]) continue;
        waiting[i] = static_cast<std::uint32_t>(parents.size());
        for (std::uint32_t p : parents) children[p].push_back(i);
        if (waiting[i] == 0) eligible.push(i);
    }

    std::vector<TxId> selected;
    std::uint32_t remaining = max_size;
    while (!eligible.empty()) {
        const std::uint32_t i = eligible.top();
        eligible.pop();
        if (entries[i].size > remaining) continue; // skip and keep scanning
        remaining -= entries[i].size;
        selected.push_back(entries[i].tx);
        for (std::uint32_t c : children[i]) {
            if (!blocked[c] && --waiting[c] == 0) eligible.push(c);
        }
    }
    return selected;
}

void Mempool::evict_with_descendants(TxId root, const TxStore& txs, std::vector<TxId>& out)
{
    std::vector<TxId> stack{root};
    while (!stack.empty()) {
        const TxId tx = stack.back();
        stack.pop_back();
        if (!remove(tx)) continue;
        out.push_back(tx);
        const auto outs = txs.outputs(tx);
        for (std::uint32_t i = 0; i < outs.size(); ++i) {
            txs.for_each_spender(Outpoint{tx, i}, [&](TxId child) {
                if (contains(child)) stack.push_back(child);
            });
        }
    }
}

MempoolUpdate Mempool::on_block(std::span<const TxId> applied, std::span<const TxId> reverted, SimTime now,
                                const TxStore& txs, const BlockStore& blocks, const ChainView& view)
{
    MempoolUpdate update;
    for (TxId tx : applied) {
        if (remove(tx)) update.removed.push_back(tx);
        if (!txs.record(tx).conflicted) continue;
        for (const Outpoint& o : txs.inputs(tx)) {
            std::vector<TxId> rivals;
            txs.for_each_spender(o, [&](TxId s) {
                if (s != tx && contains(s)) rivals.push_back(s);
            });
            for (TxId r : rivals) evict_with_descendants(r, txs, update.evicted);
        }
    }
    // Reverted transactions that do not come back (coinbases, conflicts) take
    // their in-mempool descendants with them.
    const auto evict_children = [&](TxId tx) {
        const auto outs = txs.outputs(tx);
        for (std::uint32_t i = 0; i < outs.size(); ++i) {
            std::vector<TxId> kids;
            txs.for_each_spender(Outpoint{tx, i}, [&](TxId s) {
                if (contains(s)) kids.push_back(s);
            });
            for (TxId k : kids) evict_with_descendants(k, txs, update.evicted);
        }
    };
    for (TxId tx : reverted) {
        if (txs.kind(tx) != TxKind::Regular) {
            if (!is_confirmed(txs, blocks, view, tx)) evict_children(tx);
            continue;
        }
        bool orphaned = false;
        for (const Outpoint& o : txs.inputs(tx)) {
            if (!contains(o.tx) && !is_confirmed(txs, blocks, view, o.tx)) orphaned = true;
        }
        if (orphaned && !is_confirmed(txs, blocks, view, tx)) {
            update.dropped.push_back(tx);
            evict_children(tx);
            continue;
        }
        switch (add(tx, now, txs, blocks, view)) {
        case AcceptResult::Accepted: update.reinserted.push_back(tx); break;
        case AcceptResult::Conflict:
            update.dropped.push_back(tx);
            evict_children(tx);
            break;
        default: break; // re-confirmed on the new branch
        }
    }
    return update;
}

} // namespace chainsim
