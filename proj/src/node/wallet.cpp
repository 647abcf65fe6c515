#include <chainsim/node/wallet.hpp>

#include <algorithm>

namespace chainsim {

void Wallet::insert(const UtxoRecord& u)
{
    utxos_.emplace(u.outpoint, u);
    if (u.reserved) return;
    by_value_.insert(Key{u.value, u.outpoint});
    if (u.coinbase) {
        unreserved_coinbase_.insert(u.outpoint);
    } else {
        unreserved_regular_total_ += u.value;
    }
}

void Wallet::erase(std::unordered_map<Outpoint, UtxoRecord>::iterator it)
{
    const UtxoRecord& u = it->second;
    if (!u.reserved) {
        by_value_.erase(Key{u.value, u.outpoint});
        if (u.coinbase) {
            unreserved_coinbase_.erase(u.outpoint);
        } else {
            unreserved_regular_total_ -= u.value;
        }
    }
    utxos_.erase(it);
}

void Wallet::uncredit(TxId tx, const TxStore& txs)
{
    const auto outs = txs.outputs(tx);
    for (std::uint32_t i = 0; i < outs.size(); ++i) {
        if (outs[i].recipient != owner_) continue;
        if (auto it = utxos_.find(Outpoint{tx, i}); it != utxos_.end()) erase(it);
    }
}

void Wallet::debit(TxId tx, const TxStore& txs)
{
    for (const Outpoint& o : txs.inputs(tx)) {
        if (auto it = utxos_.find(o); it != utxos_.end()) erase(it);
    }
}

bool Wallet::restore(const UtxoRecord& record)
{
    if (utxos_.contains(record.outpoint)) return false;
    UtxoRecord u = record;
    u.reserved = false;
    insert(u);
    return true;
}

Amount Wallet::balance(std::uint32_t min_conf, std::uint32_t main_height) const
{
    Amount total = 0;
    if (min_conf == 0) {
        total = unreserved_regular_total_;
        for (const Outpoint& o : unreserved_coinbase_) {
            const UtxoRecord& u = utxos_.at(o);
            if (spendable(u, 0, main_height)) total += u.value;
        }
        return total;
    }
    for (const auto& [o, u] : utxos_) {
        if (spendable(u, min_conf, main_height)) total += u.value;
    }
    return total;
}

bool Wallet::reserve(Outpoint o)
{
    auto it = utxos_.find(o);
    if (it == utxos_.end() || it->second.reserved) return false;
    UtxoRecord u = it->second;
    erase(it);
    u.reserved = true;
    insert(u);
    return true;
}

bool Wallet::release(Outpoint o)
{
    auto it = utxos_.find(o);
    if (it == utxos_.end() || !it->second.reserved) return false;
    UtxoRecord u = it->second;
    erase(it);
    u.reserved = false;
    insert(u);
    return true;
}

std::vector<UtxoRecord> Wallet::snapshot() const
{
    std::vector<UtxoRecord> out;
    out.reserve(utxos_.size());
    for (const auto& [o, u] : utxos_) out.push_back(u);
    std::sort(out.begin(), out.end(), [](const UtxoRecord& a, const UtxoRecord& b) { return a.outpoint < b.outpoint; });
    return out;
}

} // namespace chainsim
