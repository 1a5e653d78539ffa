#include "stockgan/pipeline.hpp"

#include "stockgan/errors.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace stockgan {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    ensure_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<fs::path> default_checkpoints(const RunConfig& config) {
    const ArtifactLayout layout{config.out_dir};
    std::vector<fs::path> paths;
    for (auto h : config.horizons) {
        for (auto o : config.objectives) {
            paths.push_back(layout.checkpoint(artifact_stem(config.stock_name(), o, config.window, h)));
        }
    }
    return paths;
}

void check_dims(const RunConfig& config, const TrainedModel& model, const fs::path& path) {
    const std::string where = path.filename().string();
    if (model.window != config.window) {
        throw ConfigError("window: checkpoint " + where + " was trained with " + std::to_string(model.window) +
                          ", config has " + std::to_string(config.window));
    }
    if (std::find(config.horizons.begin(), config.horizons.end(), model.horizon) == config.horizons.end()) {
        throw ConfigError("horizon: checkpoint " + where + " was trained with " + std::to_string(model.horizon) +
                          ", not among the configured horizons");
    }
    if (model.features != kFeatureCount) {
        throw ConfigError("features: checkpoint " + where + " expects " + std::to_string(model.features) +
                          " feature columns, pipeline builds " + std::to_string(kFeatureCount));
    }
}

} // namespace

PreparedData prepare_data(const RunConfig& config, const Normalizer& normalizer) {
    if (config.data_path.empty()) throw ConfigError("data_path is not set");
    PreparedData d;
    d.series = load_ohlcv_csv(config.data_path);
    d.features = build_feature_matrix(d.series, config.indicators);
    auto [train, test] = split_rows(d.features, config.train_fraction);
    d.train_raw = std::move(train);
    d.test_raw = std::move(test);
    d.normalizer = normalizer;
    d.train = with_values(d.train_raw, normalize(d.train_raw.values, d.normalizer));
    d.test = with_values(d.test_raw, normalize(d.test_raw.values, d.normalizer));
    return d;
}

PreparedData prepare_data(const RunConfig& config) {
    if (config.data_path.empty()) throw ConfigError("data_path is not set");
    const PriceSeries series = load_ohlcv_csv(config.data_path);
    const FeatureMatrix features = build_feature_matrix(series, config.indicators);
    const auto train = split_rows(features, config.train_fraction).first;
    return prepare_data(config, fit_normalizer(train.values, "train", train.close_column_index));
}

std::string artifact_stem(const std::string& stock, Objective objective, std::size_t window, std::size_t horizon) {
    return stock + "_" + to_string(objective) + "_n" + std::to_string(window) + "_h" + std::to_string(horizon);
}

fs::path ArtifactLayout::checkpoint(const std::string& stem) const { return root / "checkpoints" / (stem + ".ckpt"); }
fs::path ArtifactLayout::history(const std::string& stem) const { return root / "history" / (stem + ".csv"); }
fs::path ArtifactLayout::report(const std::string& stem, const std::string& split) const {
    return root / "reports" / (stem + "_" + split + ".json");
}
fs::path ArtifactLayout::chart_csv(const std::string& stem, const std::string& split) const {
    return root / "charts" / (stem + "_" + split + ".csv");
}
fs::path ArtifactLayout::chart_svg(const std::string& stem, const std::string& split) const {
    return root / "charts" / (stem + "_" + split + ".svg");
}

// ---- ingest ----

IngestSummary cmd_ingest(const RunConfig& config, std::ostream& log) {
    const PreparedData d = prepare_data(config);
    IngestSummary s;
    s.bars = d.series.size();
    s.bracket_violations = d.series.violations.size();
    s.first_date = d.series.bars.front().date;
    s.last_date = d.series.bars.back().date;
    s.warmup_dropped = d.features.dropped_dates.size();
    s.feature_rows = d.features.rows();
    s.train_rows = d.train_raw.rows();
    s.test_rows = d.test_raw.rows();
    for (std::size_t j = 0; j < d.features.cols(); ++j) {
        const auto col = d.features.values.col(static_cast<Eigen::Index>(j));
        s.features.push_back({d.features.column_names[j], col.minCoeff(), col.maxCoeff()});
    }

    log << "stock        " << config.stock_name() << '\n'
        << "bars         " << s.bars << " (" << format_iso_date(s.first_date) << " to "
        << format_iso_date(s.last_date) << ")\n"
        << "violations   " << s.bracket_violations << '\n'
        << "warm-up      " << s.warmup_dropped << " rows dropped\n"
        << "feature rows " << s.feature_rows << " (train " << s.train_rows << ", test " << s.test_rows << ")\n"
        << "features     " << s.features.size() << '\n';
    for (const auto& f : s.features) {
        log << "  " << f.name << std::string(f.name.size() < 16 ? 16 - f.name.size() : 1, ' ') << "min "
            << format_double(f.min) << "  max " << format_double(f.max) << '\n';
    }

    nlohmann::json j;
    j["stock"] = config.stock_name();
    j["bars"] = s.bars;
    j["bracket_violations"] = s.bracket_violations;
    j["first_date"] = format_iso_date(s.first_date);
    j["last_date"] = format_iso_date(s.last_date);
    j["warmup_dropped"] = s.warmup_dropped;
    j["feature_rows"] = s.feature_rows;
    j["train_rows"] = s.train_rows;
    j["test_rows"] = s.test_rows;
    j["features"] = nlohmann::json::array();
    for (const auto& f : s.features) j["features"].push_back({{"name", f.name}, {"min", f.min}, {"max", f.max}});
    write_text(config.out_dir / ("ingest_" + config.stock_name() + ".json"), j.dump(2) + "\n");
    return s;
}

// ---- train ----

std::vector<TrainOutcome> cmd_train(const RunConfig& config, std::ostream& log) {
    config.validate();
    const PreparedData d = prepare_data(config);
    const ArtifactLayout layout{config.out_dir};
    std::vector<TrainOutcome> outcomes;
    for (auto h : config.horizons) {
        const SegmentSet segments = make_segments(d.train, config.window, h);
        for (auto objective : config.objectives) {
            const std::string stem = artifact_stem(config.stock_name(), objective, config.window, h);
            TrainOutcome outcome{objective, h, layout.checkpoint(stem), layout.history(stem), std::nullopt};
            const TrainConfig tc = config.train_config(objective);
            const std::size_t every = std::max<std::size_t>(1, tc.epochs / 10);
            try {
                const TrainedModel model = train(segments, tc, d.normalizer, [&](const TrainedModel& m) {
                    const auto& r = m.history.back();
                    if (r.epoch % every == 0 || r.epoch == tc.epochs) {
                        log << "  " << stem << " epoch " << r.epoch << "/" << tc.epochs << " d "
                            << format_double(r.d_loss) << " g " << format_double(r.g_loss) << " train_rmse "
                            << format_double(r.train_rmse) << '\n';
                    }
                });
                ensure_dir(outcome.checkpoint.parent_path());
                save_model(outcome.checkpoint, model);
                std::ostringstream hist;
                write_history_csv(hist, model.history);
                write_text(outcome.history, hist.str());
                log << "trained " << stem << " -> " << outcome.checkpoint.string() << '\n';
            } catch (const TrainingError& e) {
                outcome.error = e.what();
                log << "failed " << stem << ": " << e.code() << ": " << e.what() << '\n';
            }
            outcomes.push_back(std::move(outcome));
        }
    }
    return outcomes;
}

// ---- evaluate ----

std::vector<EvalReport> cmd_evaluate(const RunConfig& config, const std::vector<fs::path>& checkpoints,
                                     std::ostream& log) {
    const std::vector<fs::path> paths = checkpoints.empty() ? default_checkpoints(config) : checkpoints;
    const ArtifactLayout layout{config.out_dir};
    ensure_dir(config.out_dir / "reports");
    ensure_dir(config.out_dir / "charts");
    std::vector<EvalReport> reports;
    std::ostringstream dist;
    dist << "model,window,horizon,split,rmse,wasserstein1,predicted_std,real_std\n";
    for (const auto& path : paths) {
        if (!fs::exists(path)) throw IoError("checkpoint '" + path.string() + "' does not exist");
        const TrainedModel model = load_model(path);
        check_dims(config, model, path);
        const PreparedData d = prepare_data(config, model.normalizer);
        const std::string stem = artifact_stem(config.stock_name(), model.objective, model.window, model.horizon);
        for (const std::string split : {"train", "test"}) {
            const SegmentSet segments =
                make_segments(split == "train" ? d.train : d.test, model.window, model.horizon);
            EvalReport report = evaluate(model, segments, split, config.stock_name());
            write_text(layout.report(stem, split), to_json(report).dump(1) + "\n");
            std::optional<fs::path> svg;
            if (config.render_svg) svg = layout.chart_svg(stem, split);
            emit_chart_data(report, layout.chart_csv(stem, split), svg);
            dist << report.model_name << ',' << report.window << ',' << report.horizon << ',' << split << ','
                 << format_double(report.rmse) << ',' << format_double(report.distribution_distance) << ','
                 << format_double(report.predicted_std) << ',' << format_double(report.real_std) << '\n';
            log << stem << " " << split << " rmse " << format_double(report.rmse) << " w1 "
                << format_double(report.distribution_distance) << " sd " << format_double(report.predicted_std)
                << "/" << format_double(report.real_std) << '\n';
            reports.push_back(std::move(report));
        }
    }
    write_text(config.out_dir / ("distribution_" + config.stock_name() + ".csv"), dist.str());
    return reports;
}

// ---- compare ----

std::vector<CompareOutput> cmd_compare(const RunConfig& config, const std::vector<fs::path>& report_paths,
                                       std::ostream& log) {
    std::vector<fs::path> paths = report_paths;
    if (paths.empty()) {
        const fs::path dir = config.out_dir / "reports";
        if (fs::is_directory(dir)) {
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.path().extension() == ".json") paths.push_back(entry.path());
            }
        }
        std::sort(paths.begin(), paths.end());
    }
    if (paths.empty()) throw InsufficientDataError("no reports found under '" + (config.out_dir / "reports").string() + "'");

    std::map<std::string, std::vector<EvalReport>> by_stock;
    for (const auto& p : paths) {
        std::ifstream in(p);
        if (!in) throw IoError("cannot open report '" + p.string() + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(p.string() + ": " + e.what());
        }
        EvalReport r = report_from_json(j);
        by_stock[r.stock].push_back(std::move(r));
    }
    std::vector<CompareOutput> outputs;
    for (const auto& [stock, reports] : by_stock) {
        CompareOutput out;
        out.table = comparison_table(reports);
        const std::string base = "comparison_" + (stock.empty() ? std::string("series") : stock);
        out.text_path = config.out_dir / (base + ".txt");
        out.csv_path = config.out_dir / (base + ".csv");
        write_text(out.text_path, out.table.render_text());
        write_text(out.csv_path, out.table.render_csv());
        log << out.table.render_text();
        outputs.push_back(std::move(out));
    }
    return outputs;
}

// ---- predict ----

std::vector<Forecast> cmd_predict(const RunConfig& config, const std::vector<fs::path>& checkpoints,
                                  std::ostream& log) {
    const std::vector<fs::path> paths = checkpoints.empty() ? default_checkpoints(config) : checkpoints;
    std::vector<Forecast> forecasts;
    std::ostringstream csv;
    csv << "model,window,horizon,anchor_date,step,predicted\n";
    for (const auto& path : paths) {
        if (!fs::exists(path)) throw IoError("checkpoint '" + path.string() + "' does not exist");
        const TrainedModel model = load_model(path);
        check_dims(config, model, path);
        const PriceSeries series = load_ohlcv_csv(config.data_path);
        const FeatureMatrix raw = build_feature_matrix(series, config.indicators);
        const FeatureMatrix normalized = with_values(raw, normalize(raw.values, model.normalizer));
        SegmentSet windows = make_forecast_windows(normalized, model.window, model.horizon);
        windows.segments = {windows.segments.back()};
        const Matrix pred = predict(model, windows);
        Forecast f{to_string(model.objective), windows.segments.front().anchor_date, {}};
        for (Eigen::Index h = 0; h < pred.cols(); ++h) f.predicted.push_back(denormalize_close(pred(0, h), model.normalizer));
        log << f.model_name << " after " << format_iso_date(f.anchor_date) << ":";
        for (std::size_t h = 0; h < f.predicted.size(); ++h) {
            log << " t+" << h + 1 << "=" << format_double(f.predicted[h]);
            csv << f.model_name << ',' << model.window << ',' << model.horizon << ',' << format_iso_date(f.anchor_date)
                << ',' << h + 1 << ',' << format_double(f.predicted[h]) << '\n';
        }
        log << '\n';
        forecasts.push_back(std::move(f));
    }
    write_text(config.out_dir / ("forecast_" + config.stock_name() + ".csv"), csv.str());
    return forecasts;
}

} // namespace stockgan
