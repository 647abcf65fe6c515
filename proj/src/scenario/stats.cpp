#include <chainsim/scenario/stats.hpp>

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace chainsim {

double t_critical(double confidence, double df)
{
    const boost::math::students_t dist(df);
    return boost::math::quantile(dist, 0.5 + confidence / 2.0);
}

SampleStats summarize(std::span<const double> values, double confidence)
{
    SampleStats s;
    s.n = values.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    const double half = t_critical(confidence, static_cast<double>(s.n - 1)) * s.sd / std::sqrt(static_cast<double>(s.n));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

} // namespace chainsim
