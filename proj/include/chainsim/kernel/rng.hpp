#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace chainsim {

/// A distribution specification, validated at scenario-load time.
struct Distribution {
    enum class Kind : std::uint8_t { Constant, Uniform, Exponential, Empirical };

    Kind kind = Kind::Constant;
    double a = 0.0; // constant value, uniform lower bound, or exponential mean
    double b = 0.0; // uniform upper bound
    std::vector<double> values;

    static Distribution constant(double v) { return {Kind::Constant, v, 0.0, {}}; }
    static Distribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, {}}; }
    static Distribution exponential(double mean) { return {Kind::Exponential, mean, 0.0, {}}; }
    static Distribution empirical(std::vector<double> v) { return {Kind::Empirical, 0.0, 0.0, std::move(v)}; }

    /// Empty when valid; otherwise a description of the violation.
    std::optional<std::string> validate() const;

    double mean() const;
    double min() const;
    double max() const;
    std::string describe() const;

    bool operator==(const Distribution&) const = default;
};

/// Independent random stream keyed by (run seed, stream name). Draws on one
/// stream never affect another.
class RngStream {
public:
    RngStream(std::uint64_t run_seed, std::string_view name);

    const std::string& name() const { return name_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform integer on [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

private:
    std::string name_;
    std::mt19937_64 engine_;
};

/// Seed derivation shared by all streams; exposed for tests.
std::uint64_t derive_stream_seed(std::uint64_t run_seed, std::string_view name);

double draw(RngStream& stream, const Distribution& dist);

} // namespace chainsim
