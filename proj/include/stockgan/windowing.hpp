#pragma once

#include "stockgan/indicators.hpp"
#include "stockgan/types.hpp"

#include <vector>

namespace stockgan {

struct Segment {
    Matrix inputs;                   // N x M normalized features
    std::vector<double> hist_closes; // close column of `inputs`
    std::vector<double> target;      // next H normalized closes
    Date anchor_date;                // date of the last input row
    std::vector<Date> target_dates;
};

struct SegmentSet {
    std::vector<Segment> segments;
    std::size_t window = 0;
    std::size_t horizon = 0;
    std::size_t features = 0;

    std::size_t size() const noexcept { return segments.size(); }
    bool empty() const noexcept { return segments.empty(); }
};

// Stride-1 windows: segment i reads rows [i, i+N) and targets closes [i+N, i+N+H).
SegmentSet make_segments(const FeatureMatrix& features, std::size_t window, std::size_t horizon);

// Windows for forecasting past the end of the data: every N-row window,
// including the last one, with empty targets.
SegmentSet make_forecast_windows(const FeatureMatrix& features, std::size_t window,
                                 std::size_t horizon);

// hist_closes ++ target
std::vector<double> build_real_input(const Segment& seg);
// hist_closes ++ predicted
std::vector<double> build_fake_input(const Segment& seg, const std::vector<double>& predicted);

} // namespace stockgan
