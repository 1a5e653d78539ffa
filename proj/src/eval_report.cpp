#include "stockgan/eval_report.hpp"

#include "stockgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace stockgan {

double rmse(std::span<const double> real, std::span<const double> predicted) {
    if (real.size() != predicted.size()) {
        throw ShapeError("rmse: lengths " + std::to_string(real.size()) + " and " +
                         std::to_string(predicted.size()) + " differ");
    }
    if (real.empty()) throw ShapeError("rmse: empty input");
    double ss = 0.0;
    for (std::size_t i = 0; i < real.size(); ++i) ss += (real[i] - predicted[i]) * (real[i] - predicted[i]);
    return std::sqrt(ss / static_cast<double>(real.size()));
}

double wasserstein1_empirical(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ShapeError("wasserstein1_empirical: empty sample");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa.size() == sb.size()) {
        double total = 0.0;
        for (std::size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
        return total / static_cast<double>(sa.size());
    }
    // Walk the merged quantile breakpoints i/n and j/m; both quantile functions
    // are constant between consecutive breakpoints.
    const auto n = static_cast<double>(sa.size());
    const auto m = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double u = 0.0;
    double total = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double next_a = static_cast<double>(i + 1) / n;
        const double next_b = static_cast<double>(j + 1) / m;
        const double next = std::min(next_a, next_b);
        total += (next - u) * std::abs(sa[i] - sb[j]);
        u = next;
        if (next_a <= next) ++i;
        if (next_b <= next) ++j;
    }
    return total;
}

double population_std(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

EvalReport make_report(std::string model_name, std::string stock, std::string split, std::size_t window,
                       std::size_t horizon, std::vector<PricePair> pairs) {
    if (pairs.empty()) throw InsufficientDataError("report for " + model_name + "/" + split + " has no pairs");
    EvalReport r;
    r.model_name = std::move(model_name);
    r.stock = std::move(stock);
    r.split = std::move(split);
    r.window = window;
    r.horizon = horizon;
    r.pairs = std::move(pairs);
    std::vector<double> real;
    std::vector<double> pred;
    for (const auto& p : r.pairs) {
        real.push_back(p.real);
        pred.push_back(p.predicted);
    }
    r.rmse = rmse(real, pred);
    r.distribution_distance = wasserstein1_empirical(pred, real);
    r.predicted_std = population_std(pred);
    r.real_std = population_std(real);
    return r;
}

EvalReport evaluate(const TrainedModel& model, const SegmentSet& segments, const std::string& split,
                    const std::string& stock, const std::string& model_name) {
    if (segments.horizon != model.horizon) {
        throw ShapeError("evaluate: segments have horizon " + std::to_string(segments.horizon) + ", model " +
                         std::to_string(model.horizon));
    }
    const Matrix pred = predict(model, segments);
    std::vector<PricePair> pairs;
    pairs.reserve(segments.size() * segments.horizon);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& seg = segments.segments[i];
        for (std::size_t h = 0; h < segments.horizon; ++h) {
            pairs.push_back({seg.target_dates[h], denormalize_close(seg.target[h], model.normalizer),
                             denormalize_close(pred(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)),
                                               model.normalizer)});
        }
    }
    return make_report(model_name.empty() ? to_string(model.objective) : model_name, stock, split, model.window,
                       model.horizon, std::move(pairs));
}

EvalReport persistence_report(const SegmentSet& segments, const Normalizer& normalizer, const std::string& split,
                              const std::string& stock) {
    std::vector<PricePair> pairs;
    for (const auto& seg : segments.segments) {
        const double last = denormalize_close(seg.hist_closes.back(), normalizer);
        for (std::size_t h = 0; h < segments.horizon; ++h) {
            pairs.push_back({seg.target_dates[h], denormalize_close(seg.target[h], normalizer), last});
        }
    }
    return make_report("persistence", stock, split, segments.window, segments.horizon, std::move(pairs));
}

// ---- tables ----

std::string TableColumn::label() const {
    std::string s = split;
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s + " " + std::to_string(window) + " to " + std::to_string(horizon);
}

namespace {

int model_rank(const std::string& name) {
    static const std::vector<std::string> order = {"dragan_fm", "wgan_gp", "basic_gan", "lstm", "persistence"};
    const auto it = std::find(order.begin(), order.end(), name);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

int split_rank(const std::string& split) { return split == "train" ? 0 : split == "test" ? 1 : 2; }

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

} // namespace

ComparisonTable comparison_table(const std::vector<EvalReport>& reports) {
    ComparisonTable table;
    if (reports.empty()) return table;
    table.stock = reports.front().stock;
    for (const auto& r : reports) {
        if (r.stock != table.stock) {
            throw ConfigError("comparison_table: reports mix stocks '" + table.stock + "' and '" + r.stock + "'");
        }
        if (std::find(table.models.begin(), table.models.end(), r.model_name) == table.models.end()) {
            table.models.push_back(r.model_name);
        }
        const bool known = std::any_of(table.columns.begin(), table.columns.end(), [&](const TableColumn& c) {
            return c.split == r.split && c.window == r.window && c.horizon == r.horizon;
        });
        if (!known) table.columns.push_back({r.split, r.window, r.horizon});
    }
    std::stable_sort(table.models.begin(), table.models.end(), [](const std::string& a, const std::string& b) {
        const int ra = model_rank(a);
        const int rb = model_rank(b);
        return ra != rb ? ra < rb : a < b;
    });
    std::stable_sort(table.columns.begin(), table.columns.end(), [](const TableColumn& a, const TableColumn& b) {
        if (split_rank(a.split) != split_rank(b.split)) return split_rank(a.split) < split_rank(b.split);
        if (a.split != b.split) return a.split < b.split;
        if (a.window != b.window) return a.window < b.window;
        return a.horizon < b.horizon;
    });
    table.cells.assign(table.models.size(), std::vector<std::optional<double>>(table.columns.size()));
    for (const auto& r : reports) {
        const auto mi = static_cast<std::size_t>(
            std::find(table.models.begin(), table.models.end(), r.model_name) - table.models.begin());
        for (std::size_t ci = 0; ci < table.columns.size(); ++ci) {
            const auto& c = table.columns[ci];
            if (c.split == r.split && c.window == r.window && c.horizon == r.horizon) table.cells[mi][ci] = r.rmse;
        }
    }
    return table;
}

std::string ComparisonTable::render_text() const {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"Model"};
    for (const auto& c : columns) header.push_back(c.label());
    grid.push_back(header);
    for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<std::string> row{models[m]};
        for (const auto& cell : cells[m]) row.push_back(cell ? fixed3(*cell) : "-");
        grid.push_back(row);
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : grid)
        for (std::size_t j = 0; j < row.size(); ++j) widths[j] = std::max(widths[j], row[j].size());

    std::ostringstream out;
    out << "RMSE comparison" << (stock.empty() ? "" : " (" + stock + ")") << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid[i].size(); ++j) {
            const auto& s = grid[i][j];
            const std::string pad(widths[j] - s.size(), ' ');
            out << (j == 0 ? s + pad : "  " + pad + s);
        }
        out << '\n';
        if (i == 0) {
            std::size_t total = 0;
            for (std::size_t j = 0; j < widths.size(); ++j) total += widths[j] + (j == 0 ? 0 : 2);
            out << std::string(total, '-') << '\n';
        }
    }
    return out.str();
}

std::string ComparisonTable::render_csv() const {
    std::ostringstream out;
    out << "model,split,horizon,rmse\n";
    for (std::size_t m = 0; m < models.size(); ++m) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (!cells[m][c]) continue;
            out << models[m] << ',' << columns[c].split << ',' << columns[c].horizon << ','
                << format_double(*cells[m][c]) << '\n';
        }
    }
    return out.str();
}

// ---- charts ----

std::string chart_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "date,real,predicted\n";
    for (const auto& p : report.pairs) {
        out << format_iso_date(p.date) << ',' << format_double(p.real) << ',' << format_double(p.predicted) << '\n';
    }
    return out.str();
}

std::string render_svg_chart(const EvalReport& report) {
    constexpr double kWidth = 900.0;
    constexpr double kHeight = 360.0;
    constexpr double kMargin = 40.0;
    double lo = report.pairs.front().real;
    double hi = lo;
    for (const auto& p : report.pairs) {
        lo = std::min({lo, p.real, p.predicted});
        hi = std::max({hi, p.real, p.predicted});
    }
    if (hi <= lo) hi = lo + 1.0;
    const double n = std::max<double>(1.0, static_cast<double>(report.pairs.size() - 1));
    auto polyline = [&](bool predicted) {
        std::ostringstream pts;
        char buf[64];
        for (std::size_t i = 0; i < report.pairs.size(); ++i) {
            const double v = predicted ? report.pairs[i].predicted : report.pairs[i].real;
            const double x = kMargin + (kWidth - 2 * kMargin) * static_cast<double>(i) / n;
            const double y = kHeight - kMargin - (kHeight - 2 * kMargin) * (v - lo) / (hi - lo);
            std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i == 0 ? "" : " ", x, y);
            pts << buf;
        }
        return pts.str();
    };
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kMargin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << report.model_name
        << " (" << report.split << ") RMSE " << fixed3(report.rmse) << "</text>\n"
        << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" << polyline(false) << "\"/>\n"
        << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"" << polyline(true) << "\"/>\n"
        << "<text x=\"" << kWidth - 200 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#1f77b4\">real</text>\n"
        << "<text x=\"" << kWidth - 140 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">predicted</text>\n"
        << "</svg>\n";
    return svg.str();
}

void emit_chart_data(const EvalReport& report, const std::filesystem::path& csv_path,
                     const std::optional<std::filesystem::path>& svg_path) {
    if (report.pairs.empty()) throw InsufficientDataError("emit_chart_data: empty report");
    {
        std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + csv_path.string() + "'");
        out << chart_csv(report);
        if (!out) throw IoError("write failed for '" + csv_path.string() + "'");
    }
    if (svg_path) {
        std::ofstream svg(*svg_path, std::ios::binary | std::ios::trunc);
        if (svg) {
            svg << render_svg_chart(report);
        } else {
            std::clog << "warning: could not render chart to '" << svg_path->string() << "'\n";
        }
    }
}

std::vector<PricePair> read_chart_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line != "date,real,predicted") throw FormatError(path.string() + ": unexpected chart header");
    std::vector<PricePair> pairs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) throw RowError(line_no, "expected 3 columns", path.string());
        try {
            pairs.push_back({parse_iso_date(line.substr(0, c1)), std::stod(line.substr(c1 + 1, c2 - c1 - 1)),
                             std::stod(line.substr(c2 + 1))});
        } catch (const std::exception& e) {
            throw RowError(line_no, e.what(), path.string());
        }
    }
    return pairs;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : report.pairs) pairs.push_back({format_iso_date(p.date), p.real, p.predicted});
    return {{"model", report.model_name},
            {"stock", report.stock},
            {"split", report.split},
            {"window", report.window},
            {"horizon", report.horizon},
            {"rmse", report.rmse},
            {"distribution_distance", report.distribution_distance},
            {"predicted_std", report.predicted_std},
            {"real_std", report.real_std},
            {"pairs", pairs}};
}

EvalReport report_from_json(const nlohmann::json& j) {
    try {
        std::vector<PricePair> pairs;
        for (const auto& p : j.at("pairs")) {
            pairs.push_back({parse_iso_date(p.at(0).get<std::string>()), p.at(1).get<double>(), p.at(2).get<double>()});
        }
        EvalReport r = make_report(j.at("model").get<std::string>(), j.at("stock").get<std::string>(),
                                   j.at("split").get<std::string>(), j.at("window").get<std::size_t>(),
                                   j.at("horizon").get<std::size_t>(), std::move(pairs));
        if (std::abs(r.rmse - j.at("rmse").get<double>()) > 1e-9 * std::max(1.0, r.rmse)) {
            throw FormatError("report rmse does not match its pairs");
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("report: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(std::string("report: ") + e.what());
    }
}

} // namespace stockgan
