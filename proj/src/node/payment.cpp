#include <chainsim/node/payment.hpp>

#include <cmath>

namespace chainsim {

Amount fee_for(double fee_rate, std::uint32_t size)
{
    return static_cast<Amount>(std::llround(fee_rate * static_cast<double>(size)));
}

Amount estimated_fee(const PaymentRequest& req)
{
    const auto outs = static_cast<std::uint32_t>(req.recipients.size() + 1);
    return fee_for(req.fee_rate, estimate_tx_size(1, outs));
}

std::optional<PaymentPlan> plan_payment(const Wallet& wallet, std::uint32_t min_conf, std::uint32_t main_height,
                                        const PaymentRequest& req)
{
    if (req.recipients.empty() || req.amount < 0 || req.fee_rate < 0) return std::nullopt;
    const auto k = static_cast<std::uint32_t>(req.recipients.size());

    auto picked = wallet.select_largest_first(min_conf, main_height, [&](std::size_t count, Amount sum) {
        return sum >= req.amount + fee_for(req.fee_rate, estimate_tx_size(static_cast<std::uint32_t>(count), k + 1));
    });
    if (!picked) return std::nullopt;

    PaymentPlan plan;
    plan.inputs = std::move(*picked);
    for (const UtxoRecord& u : plan.inputs) plan.input_total += u.value;
    const auto n_in = static_cast<std::uint32_t>(plan.inputs.size());

    const Amount share = req.amount / k;
    const Amount remainder = req.amount - share * k;
    for (std::uint32_t i = 0; i < k; ++i) {
        plan.outputs.push_back({share + (i == 0 ? remainder : 0), req.recipients[i]});
    }

    const std::uint32_t size_with_change = estimate_tx_size(n_in, k + 1);
    const Amount fee = fee_for(req.fee_rate, size_with_change);
    const Amount change = plan.input_total - req.amount - fee;
    if (change >= req.dust_threshold) {
        plan.outputs.push_back({change, req.change_address});
        plan.size = size_with_change;
        plan.fee = fee;
        plan.change = change;
    } else {
        plan.size = estimate_tx_size(n_in, k);
        plan.fee = plan.input_total - req.amount;
        plan.change = 0;
    }
    return plan;
}

} // namespace chainsim
