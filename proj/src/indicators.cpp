#include "stockgan/indicators.hpp"

#include "stockgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stockgan {

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

void require_non_empty(const std::vector<double>& x, const char* op) {
    if (x.empty()) {
        throw EmptySeriesError(std::string(op) + ": empty input");
    }
}

} // namespace

namespace indicators {

std::vector<double> sma(const std::vector<double>& x, int n) {
    if (n < 1) {
        throw ParameterError("sma: window must be >= 1, got " + std::to_string(n));
    }
    const auto window = static_cast<std::size_t>(n);
    std::vector<double> out(x.size(), kUndefined);
    // Each window summed afresh; O(T*n) keeps results free of running-sum drift.
    for (std::size_t t = window - 1; t < x.size(); ++t) {
        double sum = 0.0;
        for (std::size_t i = t + 1 - window; i <= t; ++i) sum += x[i];
        out[t] = sum / static_cast<double>(window);
    }
    return out;
}

std::vector<double> ema(const std::vector<double>& x, int span) {
    if (span < 1) {
        throw ParameterError("ema: span must be >= 1, got " + std::to_string(span));
    }
    std::vector<double> out(x.size());
    if (x.empty()) return out;
    const double alpha = 2.0 / (static_cast<double>(span) + 1.0);
    out[0] = x[0];
    for (std::size_t t = 1; t < x.size(); ++t) {
        out[t] = alpha * x[t] + (1.0 - alpha) * out[t - 1];
    }
    return out;
}

std::vector<double> macd(const std::vector<double>& close, int fast, int slow) {
    require_non_empty(close, "macd");
    const auto fast_ema = ema(close, fast);
    const auto slow_ema = ema(close, slow);
    std::vector<double> out(close.size());
    for (std::size_t t = 0; t < close.size(); ++t) out[t] = fast_ema[t] - slow_ema[t];
    return out;
}

std::vector<double> log_momentum(const std::vector<double>& close, int lag) {
    if (lag < 1) {
        throw ParameterError("log_momentum: lag must be >= 1");
    }
    for (std::size_t t = 0; t < close.size(); ++t) {
        if (!(close[t] > 0.0)) {
            throw DomainError("log_momentum: non-positive close at index " + std::to_string(t));
        }
    }
    const auto l = static_cast<std::size_t>(lag);
    std::vector<double> out(close.size(), kUndefined);
    for (std::size_t t = l; t < close.size(); ++t) {
        out[t] = std::log(close[t]) - std::log(close[t - l]);
    }
    return out;
}

Bands bollinger(const std::vector<double>& close, int n, double k) {
    if (n < 2) {
        throw ParameterError("bollinger: window must be >= 2, got " + std::to_string(n));
    }
    Bands bands;
    bands.middle = sma(close, n);
    bands.upper.assign(close.size(), kUndefined);
    bands.lower.assign(close.size(), kUndefined);
    const auto window = static_cast<std::size_t>(n);
    for (std::size_t t = window - 1; t < close.size(); ++t) {
        const double mean = bands.middle[t];
        double ss = 0.0;
        for (std::size_t i = t + 1 - window; i <= t; ++i) ss += (close[i] - mean) * (close[i] - mean);
        const double sd = std::sqrt(ss / static_cast<double>(window));
        bands.upper[t] = mean + k * sd;
        bands.lower[t] = mean - k * sd;
    }
    return bands;
}

} // namespace indicators

std::size_t IndicatorParams::warmup_rows() const {
    const int lookback = std::max({ma_short - 1, ma_long - 1, bollinger_window - 1,
                                   macd_slow - 1, macd_fast - 1, momentum_lag});
    return static_cast<std::size_t>(std::max(lookback, 0));
}

std::vector<double> FeatureMatrix::close_column() const {
    std::vector<double> out(rows());
    for (std::size_t i = 0; i < rows(); ++i) {
        out[i] = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(close_column_index));
    }
    return out;
}

const std::vector<std::string>& feature_column_names() {
    static const std::vector<std::string> names = {
        "Open", "High", "Low", "Close", "AdjClose", "Volume", "MA7",
        "MA21", "MACD", "EMA12", "LogMomentum", "BollingerUpper", "BollingerMiddle", "BollingerLower"};
    return names;
}

FeatureMatrix build_feature_matrix(const PriceSeries& series, const IndicatorParams& params) {
    const std::size_t warmup = params.warmup_rows();
    if (series.size() < warmup + 1) {
        throw InsufficientDataError("feature construction needs at least " +
                                    std::to_string(warmup + 1) + " bars, got " +
                                    std::to_string(series.size()));
    }
    const auto close = series.closes();
    const auto ma_short = indicators::sma(close, params.ma_short);
    const auto ma_long = indicators::sma(close, params.ma_long);
    const auto macd_line = indicators::macd(close, params.macd_fast, params.macd_slow);
    const auto ema_line = indicators::ema(close, params.ema_span);
    const auto momentum = indicators::log_momentum(close, params.momentum_lag);
    const auto bands = indicators::bollinger(close, params.bollinger_window, params.bollinger_width);

    FeatureMatrix fm;
    fm.column_names = feature_column_names();
    fm.close_column_index = 3;
    const std::size_t kept = series.size() - warmup;
    fm.values.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t t = 0; t < warmup; ++t) fm.dropped_dates.push_back(series.bars[t].date);
    for (std::size_t t = warmup; t < series.size(); ++t) {
        const auto& bar = series.bars[t];
        const double row[kFeatureCount] = {bar.open,         bar.high,          bar.low,
                                           bar.close,        bar.adj_close,     bar.volume,
                                           ma_short[t],      ma_long[t],        macd_line[t],
                                           ema_line[t],      momentum[t],       bands.upper[t],
                                           bands.middle[t],  bands.lower[t]};
        const auto r = static_cast<Eigen::Index>(t - warmup);
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            if (!std::isfinite(row[j])) {
                throw NumericError("feature " + fm.column_names[j] + " undefined at " +
                                   format_iso_date(bar.date) + " after warm-up");
            }
            fm.values(r, static_cast<Eigen::Index>(j)) = row[j];
        }
        fm.dates.push_back(bar.date);
    }
    return fm;
}

FeatureMatrix with_values(const FeatureMatrix& features, Matrix values) {
    FeatureMatrix out;
    out.values = std::move(values);
    out.column_names = features.column_names;
    out.dates = features.dates;
    out.close_column_index = features.close_column_index;
    out.dropped_dates = features.dropped_dates;
    return out;
}

std::pair<FeatureMatrix, FeatureMatrix> split_rows(const FeatureMatrix& features,
                                                   double train_fraction) {
    const std::size_t cut = split_point(features.rows(), train_fraction);
    auto take = [&](std::size_t begin, std::size_t end) {
        FeatureMatrix part;
        part.column_names = features.column_names;
        part.close_column_index = features.close_column_index;
        part.values = features.values.middleRows(static_cast<Eigen::Index>(begin),
                                                 static_cast<Eigen::Index>(end - begin));
        part.dates.assign(features.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                          features.dates.begin() + static_cast<std::ptrdiff_t>(end));
        return part;
    };
    auto train = take(0, cut);
    train.dropped_dates = features.dropped_dates;
    return {std::move(train), take(cut, features.rows())};
}

} // namespace stockgan
