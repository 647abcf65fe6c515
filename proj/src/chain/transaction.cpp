#include <chainsim/chain/transaction.hpp>

#include <limits>

#include <fmt/format.h>

namespace chainsim {

TxId TxStore::add(TxKind kind, NodeId origin, SimTime created, std::uint32_t size,
                  std::span<const Outpoint> inputs, std::span<const TxOutput> outputs)
{
    if (size == 0) throw InvalidTransaction("transaction size must be positive");
    if (inputs.size() > std::numeric_limits<std::uint16_t>::max() ||
        outputs.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw InvalidTransaction("too many inputs or outputs");
    }
    if (kind == TxKind::Regular && inputs.empty()) {
        throw InvalidTransaction("regular transaction without inputs");
    }
    if (kind != TxKind::Regular && !inputs.empty()) {
        throw InvalidTransaction("coinbase/allocation transaction with inputs");
    }

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = i + 1; j < inputs.size(); ++j) {
            if (inputs[i] == inputs[j]) throw InvalidTransaction("transaction spends the same output twice");
        }
    }

    Amount in_total = 0;
    for (const Outpoint& o : inputs) {
        if (!has_output(o)) {
            throw InvalidTransaction(fmt::format("input references unknown output {}:{}", o.tx.value, o.index));
        }
        in_total += output(o).value;
    }
    Amount out_total = 0;
    for (const TxOutput& out : outputs) {
        if (out.value < 0) throw InvalidTransaction("negative output value");
        out_total += out.value;
    }
    const Amount fee = kind == TxKind::Regular ? in_total - out_total : 0;
    if (fee < 0) {
        throw InvalidTransaction(fmt::format("outputs ({}) exceed inputs ({})", out_total, in_total));
    }

    const TxId id{static_cast<std::uint32_t>(records_.size())};
    TxRecord rec;
    rec.input_count = static_cast<std::uint16_t>(inputs.size());
    rec.output_count = static_cast<std::uint16_t>(outputs.size());
    rec.size = size;
    rec.fee = fee;
    rec.created = created;
    rec.origin = origin;
    rec.kind = kind;

    rec.input_begin = static_cast<std::uint32_t>(inputs_.append(inputs));
    rec.output_begin = static_cast<std::uint32_t>(outputs_.append(outputs));
    first_spender_.resize(outputs_.size());
    records_.push_back(rec);

    for (const Outpoint& o : inputs) {
        const std::uint32_t slot = records_[o.tx.value].output_begin + o.index;
        TxId& first = first_spender_[slot];
        if (!first.valid()) {
            first = id;
            continue;
        }
        // Double spend: flag every spender so mempools take the slow path.
        records_[first.value].conflicted = true;
        auto [lo, hi] = extra_spenders_.equal_range(slot);
        for (auto it = lo; it != hi; ++it) records_[it->second.value].conflicted = true;
        records_[id.value].conflicted = true;
        extra_spenders_.emplace(slot, id);
    }
    return id;
}

Amount TxStore::output_total(TxId id) const
{
    Amount total = 0;
    for (const TxOutput& out : outputs(id)) total += out.value;
    return total;
}

void TxStore::add_inclusion(TxId tx, BlockId block)
{
    TxRecord& r = records_[tx.value];
    if (!r.first_block.valid()) {
        r.first_block = block;
        return;
    }
    extra_inclusions_.emplace(tx.value, block);
}

void TxStore::remove_inclusion(TxId tx, BlockId block)
{
    TxRecord& r = records_[tx.value];
    auto [lo, hi] = extra_inclusions_.equal_range(tx.value);
    if (r.first_block == block) {
        if (lo != hi) {
            r.first_block = lo->second;
            extra_inclusions_.erase(lo);
        } else {
            r.first_block = BlockId{};
        }
        return;
    }
    for (auto it = lo; it != hi; ++it) {
        if (it->second == block) {
            extra_inclusions_.erase(it);
            return;
        }
    }
}

std::size_t TxStore::memory_bytes() const
{
    return records_.memory_bytes() + inputs_.memory_bytes() + outputs_.memory_bytes() +
           first_spender_.memory_bytes() + (extra_spenders_.size() + extra_inclusions_.size()) * 48;
}

} // namespace chainsim
