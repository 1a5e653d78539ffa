#include "stockgan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace stockgan {

PriceSeries make_sine_series(const SineFixtureParams& params) {
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> noise(0.0, params.noise_sd);
    std::normal_distribution<double> wick(0.0, 0.25 * params.noise_sd);
    std::normal_distribution<double> vol_noise(0.0, 5e4);

    PriceSeries series;
    series.bars.reserve(params.bars);
    std::chrono::sys_days day{params.start};
    double prev_close = params.level;
    for (std::size_t t = 0; t < params.bars; ++t) {
        while (std::chrono::weekday{day} == std::chrono::Saturday || std::chrono::weekday{day} == std::chrono::Sunday) {
            day += std::chrono::days{1};
        }
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / params.period;
        OhlcvBar bar;
        bar.date = std::chrono::year_month_day{day};
        bar.close = params.level + params.amplitude * std::sin(phase) + noise(rng);
        bar.open = t == 0 ? bar.close : prev_close + wick(rng);
        bar.high = std::max(bar.open, bar.close) + std::abs(wick(rng));
        bar.low = std::min(bar.open, bar.close) - std::abs(wick(rng));
        bar.adj_close = bar.close;
        bar.volume = std::round(std::max(1.0, 1e6 + 2e5 * std::cos(phase) + vol_noise(rng)));
        series.bars.push_back(bar);
        prev_close = bar.close;
        day += std::chrono::days{1};
    }
    return series;
}

} // namespace stockgan
