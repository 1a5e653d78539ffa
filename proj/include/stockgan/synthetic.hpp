#pragma once

#include "stockgan/market_data.hpp"

#include <cstdint>

namespace stockgan {

// Noisy sinusoidal daily OHLCV series on consecutive weekdays. The close is
// level + amplitude*sin(2*pi*t/period) + N(0, noise_sd^2); the default
// noise_sd makes the signal standard deviation ten times the noise.
struct SineFixtureParams {
    std::size_t bars = 2000;
    double level = 100.0;
    double amplitude = 10.0;
    double period = 50.0;
    double noise_sd = 10.0 / (10.0 * 1.4142135623730951);
    Date start = Date{std::chrono::year{2010}, std::chrono::January, std::chrono::day{4}};
    std::uint64_t seed = 20100104;
};

PriceSeries make_sine_series(const SineFixtureParams& params = {});

} // namespace stockgan
