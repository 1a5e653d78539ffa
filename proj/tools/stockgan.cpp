#include "stockgan/errors.hpp"
#include "stockgan/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace stockgan;

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> data_path;
    std::optional<std::string> stock;
    std::optional<double> train_fraction;
    std::optional<std::size_t> window;
    std::vector<std::size_t> horizons;
    std::vector<std::string> objectives;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<double> lr;
    std::vector<std::string> checkpoints;
    std::vector<std::string> reports;
};

RunConfig resolve(const Overrides& o) {
    RunConfig rc = o.config_path ? load_run_config(*o.config_path) : RunConfig{};
    if (o.seed) rc.seed = *o.seed;
    if (o.out_dir) rc.out_dir = *o.out_dir;
    if (o.data_path) rc.data_path = *o.data_path;
    if (o.stock) rc.stock = *o.stock;
    if (o.train_fraction) rc.train_fraction = *o.train_fraction;
    if (o.window) rc.window = *o.window;
    if (!o.horizons.empty()) rc.horizons = o.horizons;
    if (!o.objectives.empty()) {
        rc.objectives.clear();
        for (const auto& n : o.objectives) rc.objectives.push_back(parse_objective(n));
    }
    if (o.epochs) rc.train.epochs = *o.epochs;
    if (o.batch_size) rc.train.batch_size = *o.batch_size;
    if (o.lr) rc.train.lr = *o.lr;
    rc.validate();
    return rc;
}

std::vector<std::filesystem::path> as_paths(const std::vector<std::string>& v) {
    return {v.begin(), v.end()};
}

std::string one_line(std::string s) {
    for (auto& ch : s) {
        if (ch == '\n' || ch == '\r') ch = ' ';
    }
    return s;
}

void add_data_options(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--data", o.data_path, "OHLCV CSV file (Yahoo layout)");
    cmd->add_option("--stock", o.stock, "Stock label used in artifact names");
    cmd->add_option("--train-fraction", o.train_fraction, "Chronological train share");
    cmd->add_option("--window", o.window, "Window length N");
    cmd->add_option("--horizon", o.horizons, "Forecast horizon H (repeatable)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAN-based stock price forecaster"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "Random seed");
    app.add_option("--out", o.out_dir, "Output directory");

    auto* ingest = app.add_subcommand("ingest", "Load data, build features and print a summary");
    add_data_options(ingest, o);

    auto* train_cmd = app.add_subcommand("train", "Train one model per objective and horizon");
    add_data_options(train_cmd, o);
    train_cmd->add_option("--objective", o.objectives, "dragan_fm, wgan_gp, basic_gan or lstm (repeatable)");
    train_cmd->add_option("--epochs", o.epochs, "Training epochs");
    train_cmd->add_option("--batch-size", o.batch_size, "Minibatch size");
    train_cmd->add_option("--lr", o.lr, "Adam learning rate");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score checkpoints on the train and test splits");
    add_data_options(evaluate_cmd, o);
    evaluate_cmd->add_option("--objective", o.objectives, "Objectives to evaluate (repeatable)");
    evaluate_cmd->add_option("--checkpoint", o.checkpoints, "Checkpoint file (repeatable)");

    auto* compare_cmd = app.add_subcommand("compare", "Build RMSE comparison tables from reports");
    compare_cmd->add_option("--report", o.reports, "Report JSON file (repeatable)");

    auto* predict_cmd = app.add_subcommand("predict", "Forecast past the end of the data");
    add_data_options(predict_cmd, o);
    predict_cmd->add_option("--objective", o.objectives, "Objectives to use (repeatable)");
    predict_cmd->add_option("--checkpoint", o.checkpoints, "Checkpoint file (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: CONFIG_ERROR: " << one_line(e.what()) << '\n';
        return 2;
    }

    try {
        const RunConfig rc = resolve(o);
        if (ingest->parsed()) {
            cmd_ingest(rc, std::cout);
        } else if (train_cmd->parsed()) {
            const auto outcomes = cmd_train(rc, std::cout);
            std::string failed;
            for (const auto& out : outcomes) {
                if (out.error) failed += (failed.empty() ? "" : ", ") + to_string(out.objective) + "/h" + std::to_string(out.horizon);
            }
            if (!failed.empty()) {
                std::cerr << "error: TRAINING_DIVERGED: " << failed << '\n';
                return 4;
            }
        } else if (evaluate_cmd->parsed()) {
            cmd_evaluate(rc, as_paths(o.checkpoints), std::cout);
        } else if (compare_cmd->parsed()) {
            cmd_compare(rc, as_paths(o.reports), std::cout);
        } else if (predict_cmd->parsed()) {
            cmd_predict(rc, as_paths(o.checkpoints), std::cout);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << one_line(e.what()) << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: INTERNAL_ERROR: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}
