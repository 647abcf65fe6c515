#pragma once

#include <chainsim/chain/chunked_array.hpp>
#include <chainsim/chain/ids.hpp>
#include <chainsim/kernel/sim_time.hpp>

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace chainsim {

enum class TxKind : std::uint8_t {
    Regular,
    Coinbase,   // block reward; subject to maturity
    Allocation, // genesis funding
};

/// Virtual size of a P2PKH-style transaction.
constexpr std::uint32_t estimate_tx_size(std::uint32_t inputs, std::uint32_t outputs)
{
    return 10 + 148 * inputs + 34 * outputs;
}

struct TxRecord {
    std::uint32_t input_begin = 0;
    std::uint32_t output_begin = 0;
    std::uint16_t input_count = 0;
    std::uint16_t output_count = 0;
    std::uint32_t size = 0;
    Amount fee = 0;
    SimTime created;
    NodeId origin;
    TxKind kind = TxKind::Regular;
    bool conflicted = false; // some input has more than one known spender
    BlockId first_block;     // first block known to include this transaction
};

class InvalidTransaction : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Run-wide transaction table. Each transaction is stored once; mempools,
/// wallets and blocks refer to it by id. Also indexes spenders of every output
/// and the blocks including each transaction.
class TxStore {
public:
    /// Validates structure and value flow (fee >= 0) and assigns the next id.
    TxId add(TxKind kind, NodeId origin, SimTime created, std::uint32_t size,
             std::span<const Outpoint> inputs, std::span<const TxOutput> outputs);

    bool contains(TxId id) const { return id.valid() && id.value < records_.size(); }
    const TxRecord& record(TxId id) const { return records_[id.value]; }
    std::span<const Outpoint> inputs(TxId id) const
    {
        const auto& r = records_[id.value];
        return inputs_.range(r.input_begin, r.input_count);
    }
    std::span<const TxOutput> outputs(TxId id) const
    {
        const auto& r = records_[id.value];
        return outputs_.range(r.output_begin, r.output_count);
    }
    const TxOutput& output(Outpoint o) const { return outputs_[records_[o.tx.value].output_begin + o.index]; }
    bool has_output(Outpoint o) const
    {
        return contains(o.tx) && o.index < records_[o.tx.value].output_count;
    }

    Amount fee(TxId id) const { return records_[id.value].fee; }
    std::uint32_t size(TxId id) const { return records_[id.value].size; }
    TxKind kind(TxId id) const { return records_[id.value].kind; }
    Amount output_total(TxId id) const;

    std::size_t count() const { return records_.size(); }

    /// Calls f(TxId) for every known transaction spending `o`, in id order.
    template <class F>
    void for_each_spender(Outpoint o, F&& f) const
    {
        const std::uint32_t slot = records_[o.tx.value].output_begin + o.index;
        const TxId first = first_spender_[slot];
        if (!first.valid()) return;
        f(first);
        if (extra_spenders_.empty()) return;
        auto [lo, hi] = extra_spenders_.equal_range(slot);
        for (auto it = lo; it != hi; ++it) f(it->second);
    }

    void add_inclusion(TxId tx, BlockId block);
    void remove_inclusion(TxId tx, BlockId block);

    /// Calls f(BlockId) for every stored block that includes `tx`.
    template <class F>
    void for_each_inclusion(TxId tx, F&& f) const
    {
        const BlockId first = records_[tx.value].first_block;
        if (!first.valid()) return;
        f(first);
        auto [lo, hi] = extra_inclusions_.equal_range(tx.value);
        for (auto it = lo; it != hi; ++it) f(it->second);
    }

    std::size_t memory_bytes() const;

private:
    ChunkedArray<TxRecord> records_;
    ChunkedArray<Outpoint> inputs_;
    ChunkedArray<TxOutput> outputs_;
    ChunkedArray<TxId> first_spender_; // parallel to outputs_
    std::multimap<std::uint32_t, TxId> extra_spenders_;
    std::multimap<std::uint32_t, BlockId> extra_inclusions_;
};

} // namespace chainsim
