#pragma once

#include <chainsim/node/wallet.hpp>

#include <optional>
#include <span>
#include <vector>

namespace chainsim {

inline constexpr Amount kDefaultDustThreshold = 546;

/// fee-rate (sat/vB) x size, rounded to the nearest satoshi.
Amount fee_for(double fee_rate, std::uint32_t size);

struct PaymentRequest {
    Amount amount = 0;             // total paid to recipients, split evenly
    double fee_rate = 0.0;         // sat/vB
    std::vector<NodeId> recipients;
    NodeId change_address;
    Amount dust_threshold = kDefaultDustThreshold;
};

struct PaymentPlan {
    std::vector<UtxoRecord> inputs;
    std::vector<TxOutput> outputs; // recipients first, change (if any) last
    std::uint32_t size = 0;
    Amount fee = 0;
    Amount change = 0;
    Amount input_total = 0;
};

/// Fee a wallet must cover before attempting the payment (one input).
Amount estimated_fee(const PaymentRequest& req);

/// Largest-first coin selection with a change output back to the payer;
/// change below the dust threshold is folded into the fee.
/// Invariant: input_total == amount + fee + change.
std::optional<PaymentPlan> plan_payment(const Wallet& wallet, std::uint32_t min_conf, std::uint32_t main_height,
                                        const PaymentRequest& req);

} // namespace chainsim
