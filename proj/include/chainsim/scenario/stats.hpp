#pragma once

#include <optional>
#include <span>

namespace chainsim {

struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation (n - 1)
    std::optional<double> ci_low;  // Student-t interval, n >= 2 only
    std::optional<double> ci_high;
};

SampleStats summarize(std::span<const double> values, double confidence = 0.95);

/// Two-sided critical value t_{(1+confidence)/2, df}.
double t_critical(double confidence, double df);

} // namespace chainsim
