#pragma once

#include "stockgan/eval_report.hpp"
#include "stockgan/run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stockgan {

// load -> features -> split -> normalize (fitted on train rows).
struct PreparedData {
    PriceSeries series;
    FeatureMatrix features;  // raw, warm-up dropped
    FeatureMatrix train_raw;
    FeatureMatrix test_raw;
    Normalizer normalizer;
    FeatureMatrix train;     // normalized
    FeatureMatrix test;      // normalized
};

PreparedData prepare_data(const RunConfig& config);
// Normalizes the raw splits with an existing normalizer.
PreparedData prepare_data(const RunConfig& config, const Normalizer& normalizer);

// Base name shared by a model's checkpoint, history, reports and charts.
std::string artifact_stem(const std::string& stock, Objective objective, std::size_t window, std::size_t horizon);

struct ArtifactLayout {
    std::filesystem::path root;
    std::filesystem::path checkpoint(const std::string& stem) const;
    std::filesystem::path history(const std::string& stem) const;
    std::filesystem::path report(const std::string& stem, const std::string& split) const;
    std::filesystem::path chart_csv(const std::string& stem, const std::string& split) const;
    std::filesystem::path chart_svg(const std::string& stem, const std::string& split) const;
};

struct FeatureStats {
    std::string name;
    double min = 0.0;
    double max = 0.0;
};

struct IngestSummary {
    std::size_t bars = 0;
    std::size_t bracket_violations = 0;
    Date first_date;
    Date last_date;
    std::size_t warmup_dropped = 0;
    std::size_t feature_rows = 0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::vector<FeatureStats> features;
};

IngestSummary cmd_ingest(const RunConfig& config, std::ostream& log);

struct TrainOutcome {
    Objective objective = Objective::DraganFm;
    std::size_t horizon = 0;
    std::filesystem::path checkpoint;
    std::filesystem::path history;
    std::optional<std::string> error; // set when training diverged
};

// One checkpoint and history CSV per objective and horizon. A diverging
// objective is reported in its outcome and does not stop the others.
std::vector<TrainOutcome> cmd_train(const RunConfig& config, std::ostream& log);

// With no explicit checkpoints, evaluates the ones cmd_train would have
// written for this config. Produces train and test reports per model.
std::vector<EvalReport> cmd_evaluate(const RunConfig& config, const std::vector<std::filesystem::path>& checkpoints,
                                     std::ostream& log);

struct CompareOutput {
    ComparisonTable table;
    std::filesystem::path text_path;
    std::filesystem::path csv_path;
};

// With no explicit report files, reads every report under the output
// directory. One table per stock.
std::vector<CompareOutput> cmd_compare(const RunConfig& config, const std::vector<std::filesystem::path>& reports,
                                       std::ostream& log);

struct Forecast {
    std::string model_name;
    Date anchor_date;
    std::vector<double> predicted; // price units, steps 1..H after the anchor
};

// Forecasts past the last bar of the data file.
std::vector<Forecast> cmd_predict(const RunConfig& config, const std::vector<std::filesystem::path>& checkpoints,
                                  std::ostream& log);

} // namespace stockgan
