#include <chainsim/node/invariants.hpp>

#include <chainsim/chain/ledger.hpp>

#include <fmt/format.h>

#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace chainsim {

std::vector<std::string> check_chain_value(const Network& net, const Node& node)
{
    std::vector<std::string> out;
    const TxStore& txs = net.txs();
    const BlockStore& blocks = net.blocks();
    const ConsensusParams& cp = net.params().consensus;
    std::unordered_map<Outpoint, Amount> utxo;
    Amount total = 0;

    for (BlockId id : node.view.main_chain()) {
        const Block& b = blocks.get(id);
        if (b.total_size > cp.max_block_size && !b.is_genesis()) {
            out.push_back(fmt::format("node {}: block {} size {} over limit", node.id.value, id.value, b.total_size));
        }
        Amount fees = 0;
        for (std::size_t i = 0; i < b.txs.size(); ++i) {
            const TxId tx = b.txs[i];
            const TxKind kind = txs.kind(tx);
            if ((i == 0) != (kind != TxKind::Regular)) {
                out.push_back(fmt::format("node {}: block {} tx {} in wrong position", node.id.value, id.value, tx.value));
            }
            Amount in_sum = 0;
            for (const Outpoint& o : txs.inputs(tx)) {
                auto it = utxo.find(o);
                if (it == utxo.end()) {
                    out.push_back(fmt::format("node {}: tx {} spends missing output {}:{}", node.id.value, tx.value,
                                              o.tx.value, o.index));
                    continue;
                }
                in_sum += it->second;
                utxo.erase(it);
            }
            const Amount out_sum = txs.output_total(tx);
            if (kind == TxKind::Regular) {
                if (in_sum - out_sum != txs.fee(tx)) {
                    out.push_back(fmt::format("node {}: tx {} fee mismatch", node.id.value, tx.value));
                }
                fees += in_sum - out_sum;
            } else if (kind == TxKind::Coinbase) {
                total += cp.block_subsidy;
            } else {
                total += out_sum;
            }
            const auto outs = txs.outputs(tx);
            for (std::uint32_t k = 0; k < outs.size(); ++k) utxo.emplace(Outpoint{tx, k}, outs[k].value);
        }
        if (!b.is_genesis()) {
            const Amount reward = txs.output_total(b.txs.front());
            if (reward != cp.block_subsidy + fees) {
                out.push_back(fmt::format("node {}: block {} coinbase {} != subsidy + fees {}", node.id.value,
                                          id.value, reward, cp.block_subsidy + fees));
            }
        }
    }
    Amount held = 0;
    for (const auto& [o, v] : utxo) held += v;
    if (held != total) {
        out.push_back(fmt::format("node {}: UTXO value {} != created value {}", node.id.value, held, total));
    }
    return out;
}

std::vector<std::string> check_no_double_spend(const Network& net, const Node& node)
{
    std::vector<std::string> out;
    const TxStore& txs = net.txs();
    std::unordered_set<Outpoint> spent;
    const auto visit = [&](TxId tx, const char* where) {
        for (const Outpoint& o : txs.inputs(tx)) {
            if (!spent.insert(o).second) {
                out.push_back(fmt::format("node {}: output {}:{} spent twice ({} tx {})", node.id.value, o.tx.value,
                                          o.index, where, tx.value));
            }
        }
    };
    for (BlockId id : node.view.main_chain()) {
        for (TxId tx : net.blocks().get(id).txs) visit(tx, "chain");
    }
    for (const MempoolEntry& e : node.mempool.ordered(txs)) {
        if (is_confirmed(txs, net.blocks(), node.view, e.tx)) {
            out.push_back(fmt::format("node {}: mempool holds confirmed tx {}", node.id.value, e.tx.value));
        }
        visit(e.tx, "mempool");
    }
    return out;
}

std::vector<std::string> check_mempool_order(const Network& net, const Node& node)
{
    std::vector<std::string> out;
    const std::vector<MempoolEntry> entries = node.mempool.ordered(net.txs());
    for (std::size_t i = 1; i < entries.size(); ++i) {
        const auto& a = entries[i - 1];
        const auto& b = entries[i];
        if (static_cast<__int128>(a.fee) * b.size < static_cast<__int128>(b.fee) * a.size) {
            out.push_back(fmt::format("node {}: mempool order broken at {}", node.id.value, i));
        }
    }
    return out;
}

std::vector<std::string> check_wallet(const Network& net, const Node& node)
{
    std::vector<std::string> out;
    if (!node.wallet) return out;
    const TxStore& txs = net.txs();
    const BlockStore& blocks = net.blocks();

    std::vector<std::pair<TxId, std::optional<std::uint32_t>>> live;
    for (BlockId id : node.view.main_chain()) {
        const Block& b = blocks.get(id);
        for (TxId tx : b.txs) live.emplace_back(tx, b.height);
    }
    for (const MempoolEntry& e : node.mempool.ordered(txs)) live.emplace_back(e.tx, std::nullopt);

    std::unordered_set<Outpoint> spent;
    for (const auto& [tx, h] : live) {
        for (const Outpoint& o : txs.inputs(tx)) spent.insert(o);
    }
    std::map<Outpoint, UtxoRecord> expected;
    for (const auto& [tx, h] : live) {
        const auto outs = txs.outputs(tx);
        for (std::uint32_t i = 0; i < outs.size(); ++i) {
            const Outpoint o{tx, i};
            if (outs[i].recipient != node.id || spent.contains(o)) continue;
            expected.emplace(o, UtxoRecord{o, outs[i].value, h, txs.kind(tx) == TxKind::Coinbase, false});
        }
    }

    const std::vector<UtxoRecord> actual = node.wallet->snapshot();
    std::size_t matched = 0;
    for (const UtxoRecord& u : actual) {
        auto it = expected.find(u.outpoint);
        if (it == expected.end()) {
            out.push_back(fmt::format("node {}: wallet holds unexpected {}:{}", node.id.value, u.outpoint.tx.value,
                                      u.outpoint.index));
            continue;
        }
        ++matched;
        const UtxoRecord& e = it->second;
        if (e.value != u.value || e.height != u.height || e.coinbase != u.coinbase || u.reserved) {
            out.push_back(fmt::format("node {}: wallet record {}:{} differs", node.id.value, u.outpoint.tx.value,
                                      u.outpoint.index));
        }
    }
    if (matched != expected.size()) {
        out.push_back(fmt::format("node {}: wallet missing {} outputs", node.id.value, expected.size() - matched));
    }
    return out;
}

std::vector<std::string> check_network(const Network& net)
{
    std::vector<std::string> out;
    const auto append = [&](std::vector<std::string> v) {
        for (auto& s : v) out.push_back(std::move(s));
    };
    for (NodeId id : net.node_directory().all()) {
        const Node& n = net.node(id);
        append(check_chain_value(net, n));
        append(check_no_double_spend(net, n));
        append(check_mempool_order(net, n));
        append(check_wallet(net, n));
    }
    return out;
}

} // namespace chainsim
