#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>

namespace chainsim {

/// Run-scoped sequential identifier. No hashing is simulated.
template <class Tag>
struct Id {
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    std::uint32_t value = kNone;

    constexpr Id() = default;
    constexpr explicit Id(std::uint32_t v) : value(v) {}

    constexpr bool valid() const { return value != kNone; }
    constexpr auto operator<=>(const Id&) const = default;
};

using NodeId = Id<struct NodeTag>;
using TxId = Id<struct TxTag>;
using BlockId = Id<struct BlockTag>;

/// Satoshi amounts.
using Amount = std::int64_t;

inline constexpr Amount kCoin = 100'000'000;

struct Outpoint {
    TxId tx;
    std::uint32_t index = 0;

    constexpr auto operator<=>(const Outpoint&) const = default;
};

struct TxOutput {
    Amount value = 0;
    NodeId recipient; // wallet address; one address per node
};

} // namespace chainsim

template <class Tag>
struct std::hash<chainsim::Id<Tag>> {
    std::size_t operator()(chainsim::Id<Tag> id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

template <>
struct std::hash<chainsim::Outpoint> {
    std::size_t operator()(const chainsim::Outpoint& o) const noexcept
    {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(o.tx.value) << 20) ^ o.index);
    }
};
