#pragma once

#include "stockgan/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace stockgan {

struct OhlcvBar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double adj_close = 0.0;
    double volume = 0.0;
    // False when low/high do not bracket open and close. Such rows are kept
    // and reported, never dropped.
    bool valid = true;
};

// One CSV row whose high/low bracket check failed.
struct BarViolation {
    std::size_t line = 0;
    Date date;
    std::string detail;
};

struct PriceSeries {
    std::vector<OhlcvBar> bars;
    std::vector<BarViolation> violations;

    std::size_t size() const noexcept { return bars.size(); }
    bool empty() const noexcept { return bars.empty(); }
    std::vector<double> closes() const;
    std::vector<Date> dates() const;
};

inline constexpr const char* kYahooHeader = "Date,Open,High,Low,Close,Adj Close,Volume";

// Parses Yahoo Finance daily CSV. Rows come back sorted by date.
PriceSeries parse_ohlcv_csv(std::istream& source);
PriceSeries load_ohlcv_csv(const std::filesystem::path& path);
void write_ohlcv_csv(std::ostream& out, const PriceSeries& series);

// First floor(train_fraction * size) items go to train, the rest to test.
std::size_t split_point(std::size_t length, double train_fraction);
std::pair<PriceSeries, PriceSeries> chronological_split(const PriceSeries& series,
                                                       double train_fraction);

struct Normalizer {
    std::vector<double> per_feature_min;
    std::vector<double> per_feature_max;
    std::vector<bool> degenerate;
    std::string fitted_on;
    std::size_t close_column = 3;

    std::size_t width() const noexcept { return per_feature_min.size(); }
};

Normalizer fit_normalizer(const Matrix& features, std::string fitted_on = "train",
                          std::size_t close_column = 3);

// x' = 2(x - min)/(max - min) - 1; degenerate columns map to 0.
Matrix normalize(const Matrix& features, const Normalizer& norm);
double normalize_close(double price, const Normalizer& norm);
std::vector<double> denormalize_close(const std::vector<double>& values, const Normalizer& norm);
double denormalize_close(double value, const Normalizer& norm);

} // namespace stockgan
