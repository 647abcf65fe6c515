#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace chainsim {

/// Simulated time (or a duration) in integer microseconds since simulation start.
struct SimTime {
    std::uint64_t micros = 0;

    constexpr auto operator<=>(const SimTime&) const = default;

    static constexpr SimTime from_micros(std::uint64_t us) { return SimTime{us}; }
    static constexpr SimTime from_seconds_int(std::uint64_t s) { return SimTime{s * 1'000'000ULL}; }
    /// Rounds half-up to the nearest microsecond. Negative or NaN input is a logic error.
    static SimTime from_seconds(double seconds);

    constexpr double seconds() const { return static_cast<double>(micros) / 1e6; }

    static constexpr SimTime max() { return SimTime{std::numeric_limits<std::uint64_t>::max()}; }
};

constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.micros + b.micros}; }
constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.micros - b.micros}; }
constexpr SimTime& operator+=(SimTime& a, SimTime b)
{
    a.micros += b.micros;
    return a;
}

/// Parses a decimal number of seconds ("600", "0.25", "1e3" is rejected) exactly,
/// rounding half-up at the microsecond. Accepts optional unit suffix s/m/h/d.
/// Returns false on malformed input.
bool parse_duration(std::string_view text, SimTime& out);

/// Exact decimal seconds, e.g. "90", "0.25".
std::string format_seconds(SimTime t);
/// format_seconds with an "s" suffix.
std::string format_duration(SimTime t);

} // namespace chainsim
