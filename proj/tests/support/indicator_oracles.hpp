#pragma once

// Definitional indicator references: every position is evaluated from
// scratch, with no running state shared across positions.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

inline std::vector<double> sma(const std::vector<double>& x, int n) {
    std::vector<double> y(x.size(), kUndefined);
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (t + 1 < static_cast<std::size_t>(n)) continue;
        double s = 0.0;
        for (std::size_t i = t + 1 - static_cast<std::size_t>(n); i <= t; ++i) s += x[i];
        y[t] = s / n;
    }
    return y;
}

// Closed form: y[t] = (1-a)^t x[0] + sum_{i=1..t} a (1-a)^(t-i) x[i].
inline std::vector<double> ema(const std::vector<double>& x, int span) {
    const double a = 2.0 / (span + 1.0);
    std::vector<double> y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) {
        double s = std::pow(1.0 - a, static_cast<double>(t)) * x[0];
        for (std::size_t i = 1; i <= t; ++i) s += a * std::pow(1.0 - a, static_cast<double>(t - i)) * x[i];
        y[t] = s;
    }
    return y;
}

inline std::vector<double> macd(const std::vector<double>& x, int fast = 12, int slow = 26) {
    const auto f = ema(x, fast);
    const auto s = ema(x, slow);
    std::vector<double> y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) y[t] = f[t] - s[t];
    return y;
}

inline std::vector<double> log_momentum(const std::vector<double>& x, int lag = 1) {
    std::vector<double> y(x.size(), kUndefined);
    for (std::size_t t = static_cast<std::size_t>(lag); t < x.size(); ++t) y[t] = std::log(x[t] / x[t - lag]);
    return y;
}

struct BandsRef {
    std::vector<double> upper, middle, lower;
};

inline BandsRef bollinger(const std::vector<double>& x, int n = 21, double k = 2.0) {
    BandsRef b{std::vector<double>(x.size(), kUndefined), std::vector<double>(x.size(), kUndefined),
               std::vector<double>(x.size(), kUndefined)};
    for (std::size_t t = static_cast<std::size_t>(n) - 1; t < x.size(); ++t) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += x[t - i];
        mean /= n;
        double var = 0.0;
        for (int i = 0; i < n; ++i) var += (x[t - i] - mean) * (x[t - i] - mean);
        const double sd = std::sqrt(var / n);
        b.middle[t] = mean;
        b.upper[t] = mean + k * sd;
        b.lower[t] = mean - k * sd;
    }
    return b;
}

// Max abs difference over positions where the reference is defined; -1 if
// definedness disagrees anywhere.
inline double compare_defined(const std::vector<double>& got, const std::vector<double>& ref) {
    if (got.size() != ref.size()) return -1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (std::isnan(ref[i]) != std::isnan(got[i])) return -1.0;
        if (!std::isnan(ref[i])) worst = std::max(worst, std::abs(got[i] - ref[i]));
    }
    return worst;
}

// Positive random-walk prices.
inline std::vector<double> random_prices(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> step(0.0, 0.02);
    std::uniform_real_distribution<double> start(5.0, 500.0);
    std::vector<double> x(n);
    double p = start(rng);
    for (auto& v : x) {
        p *= std::exp(step(rng));
        v = p;
    }
    return x;
}

} // namespace oracle
