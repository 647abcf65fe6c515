#pragma once

#include <chainsim/chain/transaction.hpp>

#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

namespace chainsim {

struct UtxoRecord {
    Outpoint outpoint;
    Amount value = 0;
    std::optional<std::uint32_t> height; // confirming block height; empty while in the mempool only
    bool coinbase = false;
    bool reserved = false;
};

/// UTXOs owned by one node's address, tracked against that node's main chain
/// and mempool. Confirmations are derived from the confirming height.
class Wallet {
public:
    Wallet(NodeId owner, std::uint32_t coinbase_maturity) : owner_(owner), maturity_(coinbase_maturity) {}

    NodeId address() const { return owner_; }

    /// Adds (or re-dates) outputs of `tx` paid to this wallet. Outputs for which
    /// `is_spent(outpoint)` holds are skipped. Returns the value newly added.
    template <class SpentFn>
    Amount credit(TxId tx, std::optional<std::uint32_t> height, const TxStore& txs, SpentFn&& is_spent)
    {
        Amount added = 0;
        const auto outs = txs.outputs(tx);
        const bool coinbase = txs.kind(tx) == TxKind::Coinbase;
        for (std::uint32_t i = 0; i < outs.size(); ++i) {
            if (outs[i].recipient != owner_) continue;
            const Outpoint o{tx, i};
            if (auto it = utxos_.find(o); it != utxos_.end()) {
                it->second.height = height;
                continue;
            }
            if (is_spent(o)) continue;
            insert(UtxoRecord{o, outs[i].value, height, coinbase, false});
            added += outs[i].value;
        }
        return added;
    }

    /// Removes outputs of `tx` paid to this wallet.
    void uncredit(TxId tx, const TxStore& txs);
    /// Removes this wallet's UTXOs spent by `tx`.
    void debit(TxId tx, const TxStore& txs);
    /// Re-adds a previously spent UTXO.
    bool restore(const UtxoRecord& record);

    std::uint32_t confirmations(const UtxoRecord& u, std::uint32_t main_height) const
    {
        return u.height ? main_height - *u.height + 1 : 0;
    }
    bool spendable(const UtxoRecord& u, std::uint32_t min_conf, std::uint32_t main_height) const
    {
        if (u.reserved) return false;
        const std::uint32_t conf = confirmations(u, main_height);
        if (conf < min_conf) return false;
        return !u.coinbase || conf >= maturity_;
    }

    /// Σ unreserved UTXOs with at least `min_conf` confirmations; coinbase
    /// outputs additionally need maturity.
    Amount balance(std::uint32_t min_conf, std::uint32_t main_height) const;

    /// Largest-first selection of spendable UTXOs until `need(count, sum)`
    /// reports coverage. Empty if the wallet cannot cover it.
    template <class NeedFn>
    std::optional<std::vector<UtxoRecord>> select_largest_first(std::uint32_t min_conf, std::uint32_t main_height,
                                                                NeedFn&& covered) const
    {
        std::vector<UtxoRecord> picked;
        Amount sum = 0;
        for (const Key& k : by_value_) {
            const UtxoRecord& u = utxos_.at(k.outpoint);
            if (!spendable(u, min_conf, main_height)) continue;
            picked.push_back(u);
            sum += u.value;
            if (covered(picked.size(), sum)) return picked;
        }
        return std::nullopt;
    }

    bool reserve(Outpoint o);
    bool release(Outpoint o);

    const UtxoRecord* find(Outpoint o) const
    {
        auto it = utxos_.find(o);
        return it == utxos_.end() ? nullptr : &it->second;
    }
    std::size_t utxo_count() const { return utxos_.size(); }

    /// Every UTXO, in outpoint order.
    std::vector<UtxoRecord> snapshot() const;

    std::size_t memory_bytes() const { return utxos_.size() * 96 + by_value_.size() * 56; }

private:
    struct Key {
        Amount value;
        Outpoint outpoint;
        bool operator<(const Key& o) const
        {
            if (value != o.value) return value > o.value;
            return outpoint < o.outpoint;
        }
    };

    void insert(const UtxoRecord& u);
    void erase(std::unordered_map<Outpoint, UtxoRecord>::iterator it);

    NodeId owner_;
    std::uint32_t maturity_;
    std::unordered_map<Outpoint, UtxoRecord> utxos_;
    std::set<Key> by_value_;                  // all unreserved UTXOs
    std::set<Outpoint> unreserved_coinbase_;
    Amount unreserved_regular_total_ = 0;
};

} // namespace chainsim
