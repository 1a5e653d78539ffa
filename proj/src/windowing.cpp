#include "stockgan/windowing.hpp"

#include "stockgan/errors.hpp"

namespace stockgan {

namespace {

Segment window_at(const FeatureMatrix& features, std::size_t start, std::size_t window) {
    Segment seg;
    const auto n = static_cast<Eigen::Index>(window);
    seg.inputs = features.values.middleRows(static_cast<Eigen::Index>(start), n);
    seg.hist_closes.resize(window);
    for (std::size_t r = 0; r < window; ++r) {
        seg.hist_closes[r] = seg.inputs(static_cast<Eigen::Index>(r),
                                        static_cast<Eigen::Index>(features.close_column_index));
    }
    seg.anchor_date = features.dates[start + window - 1];
    return seg;
}

void check_window_params(std::size_t window, std::size_t horizon) {
    if (window < 1 || horizon < 1) {
        throw ParameterError("window and horizon must be >= 1");
    }
}

} // namespace

SegmentSet make_segments(const FeatureMatrix& features, std::size_t window, std::size_t horizon) {
    check_window_params(window, horizon);
    const std::size_t rows = features.rows();
    if (rows < window + horizon) {
        throw InsufficientDataError("windowing needs at least " + std::to_string(window + horizon) +
                                    " rows for N=" + std::to_string(window) + ", H=" +
                                    std::to_string(horizon) + "; got " + std::to_string(rows));
    }
    SegmentSet set;
    set.window = window;
    set.horizon = horizon;
    set.features = features.cols();
    const std::size_t count = rows - window - horizon + 1;
    set.segments.reserve(count);
    const auto close_col = static_cast<Eigen::Index>(features.close_column_index);
    for (std::size_t i = 0; i < count; ++i) {
        Segment seg = window_at(features, i, window);
        seg.target.resize(horizon);
        seg.target_dates.resize(horizon);
        for (std::size_t h = 0; h < horizon; ++h) {
            seg.target[h] = features.values(static_cast<Eigen::Index>(i + window + h), close_col);
            seg.target_dates[h] = features.dates[i + window + h];
        }
        set.segments.push_back(std::move(seg));
    }
    return set;
}

SegmentSet make_forecast_windows(const FeatureMatrix& features, std::size_t window,
                                 std::size_t horizon) {
    check_window_params(window, horizon);
    if (features.rows() < window) {
        throw InsufficientDataError("forecasting needs at least " + std::to_string(window) + " rows");
    }
    SegmentSet set;
    set.window = window;
    set.horizon = horizon;
    set.features = features.cols();
    for (std::size_t i = 0; i + window <= features.rows(); ++i) {
        set.segments.push_back(window_at(features, i, window));
    }
    return set;
}

std::vector<double> build_real_input(const Segment& seg) {
    std::vector<double> out(seg.hist_closes);
    out.insert(out.end(), seg.target.begin(), seg.target.end());
    return out;
}

std::vector<double> build_fake_input(const Segment& seg, const std::vector<double>& predicted) {
    if (predicted.size() != seg.target.size()) {
        throw ShapeError("build_fake_input: predicted length " + std::to_string(predicted.size()) +
                         " != horizon " + std::to_string(seg.target.size()));
    }
    std::vector<double> out(seg.hist_closes);
    out.insert(out.end(), predicted.begin(), predicted.end());
    return out;
}

} // namespace stockgan
