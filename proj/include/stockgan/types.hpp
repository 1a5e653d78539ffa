#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace stockgan {

// Row-major so that flattening a (samples*length) x channels block into
// samples x (length*channels) is a pure reinterpretation of the buffer.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = std::vector<double>;

using Date = std::chrono::year_month_day;

// Strict ISO YYYY-MM-DD. Throws std::invalid_argument on anything else.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& date);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

} // namespace stockgan
