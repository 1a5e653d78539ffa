#pragma once

#include "stockgan/adversarial.hpp"
#include "stockgan/types.hpp"
#include "stockgan/windowing.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stockgan {

struct PricePair {
    Date date;
    double real = 0.0;
    double predicted = 0.0;
};

struct EvalReport {
    std::string model_name;
    std::string stock;
    std::string split; // "train" or "test"
    std::size_t window = 0;
    std::size_t horizon = 0;
    double rmse = 0.0; // price units
    std::vector<PricePair> pairs;
    double distribution_distance = 0.0; // Wasserstein-1, predicted vs real
    double predicted_std = 0.0;
    double real_std = 0.0;
};

double rmse(std::span<const double> real, std::span<const double> predicted);

// 1-D empirical Wasserstein-1 distance: integral over u in [0,1] of
// |Fa^-1(u) - Fb^-1(u)|.
double wasserstein1_empirical(std::span<const double> a, std::span<const double> b);

double population_std(std::span<const double> values);

// Fills rmse and the distribution statistics from `pairs`.
EvalReport make_report(std::string model_name, std::string stock, std::string split, std::size_t window,
                       std::size_t horizon, std::vector<PricePair> pairs);

// Predictions are denormalized with the model's normalizer; all H steps are
// pooled into one RMSE.
EvalReport evaluate(const TrainedModel& model, const SegmentSet& segments, const std::string& split,
                    const std::string& stock = "", const std::string& model_name = "");

// Naive forecast: every step equals the last observed close.
EvalReport persistence_report(const SegmentSet& segments, const Normalizer& normalizer, const std::string& split,
                              const std::string& stock = "");

struct TableColumn {
    std::string split;
    std::size_t window = 0;
    std::size_t horizon = 0;
    std::string label() const; // e.g. "Test 3 to 1"
};

struct ComparisonTable {
    std::string stock;
    std::vector<std::string> models;
    std::vector<TableColumn> columns;
    std::vector<std::vector<std::optional<double>>> cells; // [model][column]

    std::string render_text() const;
    // Header: model,split,horizon,rmse
    std::string render_csv() const;
};

// Rows are models, columns are split x horizon. Reports must share a stock.
ComparisonTable comparison_table(const std::vector<EvalReport>& reports);

// Writes `date,real,predicted`. When `svg_path` is given a line chart is
// rendered there as well (best effort: failures are reported, not thrown).
void emit_chart_data(const EvalReport& report, const std::filesystem::path& csv_path,
                     const std::optional<std::filesystem::path>& svg_path = std::nullopt);
std::string chart_csv(const EvalReport& report);
std::vector<PricePair> read_chart_csv(const std::filesystem::path& path);
std::string render_svg_chart(const EvalReport& report);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

} // namespace stockgan
