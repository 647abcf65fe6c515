#pragma once

#include <chainsim/node/network.hpp>

#include <string>
#include <vector>

namespace chainsim {

/// Each check recomputes its state from scratch and returns one message per violation.

/// Main-chain UTXO replay: inputs exist and are unspent, coinbase pays at most
/// subsidy + fees, block sizes fit, total value equals genesis + subsidies.
std::vector<std::string> check_chain_value(const Network& net, const Node& node);

/// No outpoint is spent twice across the main chain and the mempool.
std::vector<std::string> check_no_double_spend(const Network& net, const Node& node);

/// Mempool order is non-increasing in fee rate.
std::vector<std::string> check_mempool_order(const Network& net, const Node& node);

/// Wallet contents match a recomputation over main chain plus mempool.
std::vector<std::string> check_wallet(const Network& net, const Node& node);

/// Every check on every node.
std::vector<std::string> check_network(const Network& net);

} // namespace chainsim
