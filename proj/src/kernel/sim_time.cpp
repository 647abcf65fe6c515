#include <chainsim/kernel/sim_time.hpp>

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace chainsim {

SimTime SimTime::from_seconds(double seconds)
{
    if (!(seconds >= 0.0) || !std::isfinite(seconds)) {
        throw std::logic_error(fmt::format("invalid simulated duration {}", seconds));
    }
    return SimTime{static_cast<std::uint64_t>(std::floor(seconds * 1e6 + 0.5))};
}

bool parse_duration(std::string_view text, SimTime& out)
{
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    if (text.empty()) return false;

    std::uint64_t unit = 1;
    switch (text.back()) {
    case 's': unit = 1; break;
    case 'm': unit = 60; break;
    case 'h': unit = 3600; break;
    case 'd': unit = 86400; break;
    default: unit = 0; break;
    }
    if (unit != 0) {
        text.remove_suffix(1);
    } else {
        unit = 1;
    }
    if (text.empty()) return false;

    // Exact decimal: integer part and up to arbitrary fraction digits, scaled to
    // micro-units of the chosen unit, rounding half-up on the first dropped digit.
    std::uint64_t whole = 0;
    std::size_t i = 0;
    bool any_digit = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
        whole = whole * 10 + static_cast<std::uint64_t>(text[i] - '0');
        any_digit = true;
        if (whole > 1'000'000'000'000ULL) return false;
    }
    std::uint64_t frac_micro = 0; // fraction of one unit in 1e-6 steps
    bool round_up = false;
    if (i < text.size() && text[i] == '.') {
        ++i;
        std::uint64_t scale = 100'000;
        std::size_t digits = 0;
        for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++digits) {
            const auto d = static_cast<std::uint64_t>(text[i] - '0');
            any_digit = true;
            if (digits < 6) {
                frac_micro += d * scale;
                scale /= 10;
            } else if (digits == 6) {
                round_up = d >= 5;
            }
        }
    }
    if (i != text.size() || !any_digit) return false;

    std::uint64_t micros = whole * 1'000'000ULL + frac_micro + (round_up ? 1 : 0);
    out = SimTime{micros * unit};
    return true;
}

std::string format_seconds(SimTime t)
{
    const std::uint64_t whole = t.micros / 1'000'000;
    std::uint64_t frac = t.micros % 1'000'000;
    if (frac == 0) return fmt::format("{}", whole);
    int digits = 6;
    while (frac % 10 == 0) {
        frac /= 10;
        --digits;
    }
    return fmt::format("{}.{:0{}}", whole, frac, digits);
}

std::string format_duration(SimTime t)
{
    return format_seconds(t) + "s";
}

} // namespace chainsim
