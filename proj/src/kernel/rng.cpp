#include <chainsim/kernel/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace chainsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

std::uint64_t derive_stream_seed(std::uint64_t run_seed, std::string_view name)
{
    return splitmix64(splitmix64(run_seed) ^ fnv1a64(name));
}

RngStream::RngStream(std::uint64_t run_seed, std::string_view name)
    : name_(name), engine_(derive_stream_seed(run_seed, name))
{
}

double RngStream::uniform01()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n)
{
    // Lemire's multiply-shift with rejection; exact and platform independent.
    std::uint64_t x = engine_();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = engine_();
            m = static_cast<unsigned __int128>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::optional<std::string> Distribution::validate() const
{
    const auto finite = [](double v) { return std::isfinite(v); };
    switch (kind) {
    case Kind::Constant:
        if (!finite(a)) return "constant value must be finite";
        break;
    case Kind::Uniform:
        if (!finite(a) || !finite(b)) return "uniform bounds must be finite";
        if (a > b) return fmt::format("uniform lower bound {} exceeds upper bound {}", a, b);
        break;
    case Kind::Exponential:
        if (!finite(a) || a <= 0.0) return fmt::format("exponential mean must be positive (got {})", a);
        break;
    case Kind::Empirical:
        if (values.empty()) return "empirical distribution needs at least one value";
        if (!std::all_of(values.begin(), values.end(), finite)) return "empirical values must be finite";
        break;
    }
    return std::nullopt;
}

double Distribution::mean() const
{
    switch (kind) {
    case Kind::Constant: return a;
    case Kind::Uniform: return 0.5 * (a + b);
    case Kind::Exponential: return a;
    case Kind::Empirical:
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }
    return 0.0;
}

double Distribution::min() const
{
    switch (kind) {
    case Kind::Constant: return a;
    case Kind::Uniform: return a;
    case Kind::Exponential: return 0.0;
    case Kind::Empirical: return *std::min_element(values.begin(), values.end());
    }
    return 0.0;
}

double Distribution::max() const
{
    switch (kind) {
    case Kind::Constant: return a;
    case Kind::Uniform: return b;
    case Kind::Exponential: return INFINITY;
    case Kind::Empirical: return *std::max_element(values.begin(), values.end());
    }
    return 0.0;
}

std::string Distribution::describe() const
{
    switch (kind) {
    case Kind::Constant: return fmt::format("constant({})", a);
    case Kind::Uniform: return fmt::format("uniform({}, {})", a, b);
    case Kind::Exponential: return fmt::format("exponential(mean={})", a);
    case Kind::Empirical: return fmt::format("empirical([{}])", fmt::join(values, ", "));
    }
    return "?";
}

double draw(RngStream& stream, const Distribution& dist)
{
    switch (dist.kind) {
    case Distribution::Kind::Constant:
        return dist.a;
    case Distribution::Kind::Uniform:
        if (dist.a == dist.b) return dist.a;
        return dist.a + (dist.b - dist.a) * stream.uniform01();
    case Distribution::Kind::Exponential:
        return -dist.a * std::log1p(-stream.uniform01());
    case Distribution::Kind::Empirical:
        return dist.values[stream.uniform_index(dist.values.size())];
    }
    return 0.0;
}

} // namespace chainsim
