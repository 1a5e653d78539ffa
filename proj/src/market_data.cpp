#include "stockgan/market_data.hpp"

#include "stockgan/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>

namespace stockgan {

namespace {

std::string_view strip_line_end(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
        line.remove_suffix(1);
    }
    return line;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_number(std::string_view field, std::size_t line, const char* column) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() ||
        !std::isfinite(value)) {
        throw RowError(line, std::string("unparseable ") + column + " '" + std::string(field) + "'");
    }
    return value;
}

} // namespace

std::vector<double> PriceSeries::closes() const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& bar : bars) out.push_back(bar.close);
    return out;
}

std::vector<Date> PriceSeries::dates() const {
    std::vector<Date> out;
    out.reserve(bars.size());
    for (const auto& bar : bars) out.push_back(bar.date);
    return out;
}

PriceSeries parse_ohlcv_csv(std::istream& source) {
    std::string raw;
    if (!std::getline(source, raw)) {
        throw FormatError("missing header line");
    }
    std::string_view header = strip_line_end(raw);
    if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
    if (header != kYahooHeader) {
        throw FormatError("expected header '" + std::string(kYahooHeader) + "', got '" +
                          std::string(header) + "'");
    }

    PriceSeries series;
    std::vector<std::size_t> line_of;
    std::size_t line_no = 1;
    while (std::getline(source, raw)) {
        ++line_no;
        const std::string_view line = strip_line_end(raw);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 7) {
            throw RowError(line_no, "expected 7 columns, found " + std::to_string(fields.size()));
        }
        OhlcvBar bar;
        try {
            bar.date = parse_iso_date(fields[0]);
        } catch (const std::invalid_argument& e) {
            throw RowError(line_no, e.what());
        }
        bar.open = parse_number(fields[1], line_no, "Open");
        bar.high = parse_number(fields[2], line_no, "High");
        bar.low = parse_number(fields[3], line_no, "Low");
        bar.close = parse_number(fields[4], line_no, "Close");
        bar.adj_close = parse_number(fields[5], line_no, "Adj Close");
        bar.volume = parse_number(fields[6], line_no, "Volume");
        if (bar.volume < 0.0) {
            throw RowError(line_no, "negative volume");
        }
        if (bar.low > std::min(bar.open, bar.close) || bar.high < std::max(bar.open, bar.close)) {
            bar.valid = false;
            series.violations.push_back(
                {line_no, bar.date, "low/high do not bracket open/close"});
        }
        series.bars.push_back(bar);
        line_of.push_back(line_no);
    }

    if (series.bars.empty()) {
        throw EmptySeriesError("no data rows after header");
    }

    std::vector<std::size_t> order(series.bars.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return series.bars[a].date < series.bars[b].date;
    });
    std::vector<OhlcvBar> sorted;
    sorted.reserve(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0 && series.bars[order[k]].date == series.bars[order[k - 1]].date) {
            throw DuplicateDateError("date " + format_iso_date(series.bars[order[k]].date) +
                                     " appears on lines " + std::to_string(line_of[order[k - 1]]) +
                                     " and " + std::to_string(line_of[order[k]]));
        }
        sorted.push_back(series.bars[order[k]]);
    }
    series.bars = std::move(sorted);
    std::sort(series.violations.begin(), series.violations.end(),
              [](const BarViolation& a, const BarViolation& b) { return a.date < b.date; });
    return series;
}

PriceSeries load_ohlcv_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    try {
        return parse_ohlcv_csv(in);
    } catch (const RowError& e) {
        throw RowError(e.line(), e.detail(), path.string());
    }
}

void write_ohlcv_csv(std::ostream& out, const PriceSeries& series) {
    out << kYahooHeader << '\n';
    for (const auto& bar : series.bars) {
        out << format_iso_date(bar.date) << ',' << format_double(bar.open) << ','
            << format_double(bar.high) << ',' << format_double(bar.low) << ','
            << format_double(bar.close) << ',' << format_double(bar.adj_close) << ','
            << format_double(bar.volume) << '\n';
    }
}

std::size_t split_point(std::size_t length, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
        throw ParameterError("train_fraction must lie in (0, 1], got " + format_double(train_fraction));
    }
    // Tiny slack so that e.g. 0.7 * 100 is not truncated to 69.
    const double scaled = train_fraction * static_cast<double>(length);
    auto cut = static_cast<std::size_t>(std::floor(scaled + 1e-9));
    return std::min(cut, length);
}

std::pair<PriceSeries, PriceSeries> chronological_split(const PriceSeries& series,
                                                       double train_fraction) {
    if (series.empty()) {
        throw EmptySeriesError("cannot split an empty series");
    }
    const std::size_t cut = split_point(series.size(), train_fraction);
    PriceSeries train;
    PriceSeries test;
    train.bars.assign(series.bars.begin(), series.bars.begin() + static_cast<std::ptrdiff_t>(cut));
    test.bars.assign(series.bars.begin() + static_cast<std::ptrdiff_t>(cut), series.bars.end());
    for (const auto& v : series.violations) {
        (cut > 0 && v.date <= train.bars.back().date ? train : test).violations.push_back(v);
    }
    return {std::move(train), std::move(test)};
}

Normalizer fit_normalizer(const Matrix& features, std::string fitted_on, std::size_t close_column) {
    if (features.rows() < 1 || features.cols() < 1) {
        throw EmptySeriesError("cannot fit a normalizer on an empty matrix");
    }
    Normalizer norm;
    norm.fitted_on = std::move(fitted_on);
    norm.close_column = close_column;
    const auto cols = static_cast<std::size_t>(features.cols());
    norm.per_feature_min.resize(cols);
    norm.per_feature_max.resize(cols);
    norm.degenerate.resize(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        const auto col = features.col(static_cast<Eigen::Index>(j));
        norm.per_feature_min[j] = col.minCoeff();
        norm.per_feature_max[j] = col.maxCoeff();
        norm.degenerate[j] = !(norm.per_feature_max[j] > norm.per_feature_min[j]);
        if (norm.degenerate[j]) {
            std::clog << "warning: feature column " << j << " is constant ("
                      << format_double(norm.per_feature_min[j]) << "); normalized to 0\n";
        }
    }
    return norm;
}

Matrix normalize(const Matrix& features, const Normalizer& norm) {
    if (static_cast<std::size_t>(features.cols()) != norm.width()) {
        throw ShapeError("normalize: matrix has " + std::to_string(features.cols()) +
                         " columns, normalizer expects " + std::to_string(norm.width()));
    }
    Matrix out(features.rows(), features.cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        const auto uj = static_cast<std::size_t>(j);
        if (norm.degenerate[uj]) {
            out.col(j).setZero();
            continue;
        }
        const double lo = norm.per_feature_min[uj];
        const double span = norm.per_feature_max[uj] - lo;
        for (Eigen::Index i = 0; i < features.rows(); ++i) {
            out(i, j) = 2.0 * (features(i, j) - lo) / span - 1.0;
        }
    }
    return out;
}

namespace {

void require_close_column(const Normalizer& norm) {
    if (norm.close_column >= norm.width()) {
        throw ShapeError("normalizer has no close column");
    }
    if (norm.degenerate[norm.close_column]) {
        throw DomainError("close column is constant; prices cannot be denormalized");
    }
}

} // namespace

double normalize_close(double price, const Normalizer& norm) {
    require_close_column(norm);
    const double lo = norm.per_feature_min[norm.close_column];
    const double hi = norm.per_feature_max[norm.close_column];
    return 2.0 * (price - lo) / (hi - lo) - 1.0;
}

double denormalize_close(double value, const Normalizer& norm) {
    require_close_column(norm);
    const double lo = norm.per_feature_min[norm.close_column];
    const double hi = norm.per_feature_max[norm.close_column];
    return (value + 1.0) * 0.5 * (hi - lo) + lo;
}

std::vector<double> denormalize_close(const std::vector<double>& values, const Normalizer& norm) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(denormalize_close(v, norm));
    return out;
}

} // namespace stockgan
