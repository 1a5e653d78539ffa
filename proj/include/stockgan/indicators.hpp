#pragma once

#include "stockgan/market_data.hpp"
#include "stockgan/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace stockgan {

// Warm-up positions of every indicator sequence hold quiet NaN.
namespace indicators {

std::vector<double> sma(const std::vector<double>& x, int n);
// alpha = 2/(span+1), seeded with y[0] = x[0].
std::vector<double> ema(const std::vector<double>& x, int span);
std::vector<double> macd(const std::vector<double>& close, int fast = 12, int slow = 26);
std::vector<double> log_momentum(const std::vector<double>& close, int lag = 1);

struct Bands {
    std::vector<double> upper;
    std::vector<double> middle;
    std::vector<double> lower;
};

// Population standard deviation over the trailing window.
Bands bollinger(const std::vector<double>& close, int n = 21, double k = 2.0);

} // namespace indicators

struct IndicatorParams {
    int ma_short = 7;
    int ma_long = 21;
    int ema_span = 12;
    int macd_fast = 12;
    int macd_slow = 26;
    int momentum_lag = 1;
    int bollinger_window = 21;
    double bollinger_width = 2.0;

    // Leading rows dropped so every column is defined.
    std::size_t warmup_rows() const;
};

struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> column_names;
    std::vector<Date> dates;
    std::size_t close_column_index = 3;
    std::vector<Date> dropped_dates;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(values.cols()); }
    std::vector<double> close_column() const;
};

inline constexpr std::size_t kFeatureCount = 14;

const std::vector<std::string>& feature_column_names();

FeatureMatrix build_feature_matrix(const PriceSeries& series, const IndicatorParams& params = {});

// Row split with the same floor rule as chronological_split.
std::pair<FeatureMatrix, FeatureMatrix> split_rows(const FeatureMatrix& features,
                                                   double train_fraction);

// Same labels, dates and layout, values replaced.
FeatureMatrix with_values(const FeatureMatrix& features, Matrix values);

} // namespace stockgan
