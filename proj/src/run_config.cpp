#include "stockgan/run_config.hpp"

#include "stockgan/errors.hpp"

#include <fstream>
#include <set>

namespace stockgan {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& known) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& into, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        into = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + where + "." + key + "': " + j.at(key).dump());
    }
}

void read_indicators(const json& j, IndicatorParams& p) {
    const std::string w = "indicators";
    reject_unknown(j, w,
                   {"ma_short", "ma_long", "ema_span", "macd_fast", "macd_slow", "momentum_lag", "bollinger_window",
                    "bollinger_width"});
    read(j, "ma_short", p.ma_short, w);
    read(j, "ma_long", p.ma_long, w);
    read(j, "ema_span", p.ema_span, w);
    read(j, "macd_fast", p.macd_fast, w);
    read(j, "macd_slow", p.macd_slow, w);
    read(j, "momentum_lag", p.momentum_lag, w);
    read(j, "bollinger_window", p.bollinger_window, w);
    read(j, "bollinger_width", p.bollinger_width, w);
}

void read_architecture(const json& j, ArchitectureConfig& a) {
    const std::string w = "architecture";
    reject_unknown(j, w,
                   {"gru_units", "generator_dense", "conv_channels", "kernel_size", "discriminator_dense",
                    "leaky_slope", "feature_tap", "lstm_units"});
    read(j, "gru_units", a.gru_units, w);
    read(j, "generator_dense", a.generator_dense, w);
    read(j, "conv_channels", a.conv_channels, w);
    read(j, "kernel_size", a.kernel_size, w);
    read(j, "discriminator_dense", a.discriminator_dense, w);
    read(j, "leaky_slope", a.leaky_slope, w);
    read(j, "feature_tap", a.feature_tap, w);
    read(j, "lstm_units", a.lstm_units, w);
}

void read_train(const json& j, RunConfig& rc) {
    const std::string w = "train";
    reject_unknown(j, w,
                   {"lambda1", "lambda2", "k", "c", "noise_scale", "lr", "beta1", "beta2", "batch_size", "epochs",
                    "d_steps_per_g_step"});
    auto& t = rc.train;
    read(j, "lambda1", t.lambda1, w);
    read(j, "lambda2", t.lambda2, w);
    read(j, "k", t.k, w);
    read(j, "c", t.c, w);
    if (j.contains("noise_scale")) {
        std::string mode;
        read(j, "noise_scale", mode, w);
        if (mode == "batch_std") {
            t.noise_scale = NoiseScale::BatchStd;
        } else if (mode == "literal") {
            t.noise_scale = NoiseScale::Literal;
        } else {
            throw ConfigError("train.noise_scale must be 'batch_std' or 'literal', got '" + mode + "'");
        }
    }
    read(j, "lr", t.lr, w);
    read(j, "beta1", t.beta1, w);
    read(j, "beta2", t.beta2, w);
    read(j, "batch_size", t.batch_size, w);
    read(j, "epochs", t.epochs, w);
    if (j.contains("d_steps_per_g_step") && !j.at("d_steps_per_g_step").is_null()) {
        std::size_t steps = 0;
        read(j, "d_steps_per_g_step", steps, w);
        rc.d_steps_per_g_step = steps;
    }
}

} // namespace

std::string RunConfig::stock_name() const {
    if (!stock.empty()) return stock;
    return data_path.empty() ? std::string("series") : data_path.stem().string();
}

TrainConfig RunConfig::train_config(Objective objective) const {
    TrainConfig cfg = train;
    cfg.objective = objective;
    cfg.seed = seed;
    cfg.d_steps_per_g_step =
        d_steps_per_g_step ? *d_steps_per_g_step : TrainConfig::preset(objective).d_steps_per_g_step;
    return cfg;
}

void RunConfig::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0, 1), got " + format_double(train_fraction));
    }
    if (window < 1) throw ConfigError("window must be at least 1");
    if (horizons.empty()) throw ConfigError("horizon list is empty");
    for (auto h : horizons) {
        if (h < 1) throw ConfigError("horizon must be at least 1");
    }
    if (objectives.empty()) throw ConfigError("objective list is empty");
    try {
        for (auto o : objectives) train_config(o).validate();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

RunConfig run_config_from_json(const json& j) {
    RunConfig rc;
    reject_unknown(j, "config",
                   {"data_path", "stock", "train_fraction", "window", "horizon", "indicators", "objectives", "train",
                    "architecture", "out_dir", "seed", "render_svg"});
    const std::string w = "config";
    std::string path;
    read(j, "data_path", path, w);
    rc.data_path = path;
    read(j, "stock", rc.stock, w);
    read(j, "train_fraction", rc.train_fraction, w);
    read(j, "window", rc.window, w);
    if (j.contains("horizon")) {
        if (j.at("horizon").is_array()) {
            read(j, "horizon", rc.horizons, w);
        } else {
            std::size_t h = 0;
            read(j, "horizon", h, w);
            rc.horizons = {h};
        }
    }
    if (j.contains("indicators")) read_indicators(j.at("indicators"), rc.indicators);
    if (j.contains("objectives")) {
        std::vector<std::string> names;
        read(j, "objectives", names, w);
        rc.objectives.clear();
        for (const auto& n : names) rc.objectives.push_back(parse_objective(n));
    }
    if (j.contains("train")) read_train(j.at("train"), rc);
    if (j.contains("architecture")) read_architecture(j.at("architecture"), rc.train.arch);
    std::string out;
    read(j, "out_dir", out, w);
    if (!out.empty()) rc.out_dir = out;
    read(j, "seed", rc.seed, w);
    read(j, "render_svg", rc.render_svg, w);
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

json to_json(const RunConfig& rc) {
    std::vector<std::string> objectives;
    for (auto o : rc.objectives) objectives.push_back(to_string(o));
    const auto& t = rc.train;
    const auto& a = t.arch;
    const auto& p = rc.indicators;
    json train = {{"lambda1", t.lambda1}, {"lambda2", t.lambda2}, {"k", t.k},
                  {"c", t.c},
                  {"noise_scale", t.noise_scale == NoiseScale::Literal ? "literal" : "batch_std"},
                  {"lr", t.lr},           {"beta1", t.beta1},     {"beta2", t.beta2},
                  {"batch_size", t.batch_size},
                  {"epochs", t.epochs}};
    train["d_steps_per_g_step"] = rc.d_steps_per_g_step ? json(*rc.d_steps_per_g_step) : json(nullptr);
    return {{"data_path", rc.data_path.string()},
            {"stock", rc.stock},
            {"train_fraction", rc.train_fraction},
            {"window", rc.window},
            {"horizon", rc.horizons},
            {"indicators",
             {{"ma_short", p.ma_short},
              {"ma_long", p.ma_long},
              {"ema_span", p.ema_span},
              {"macd_fast", p.macd_fast},
              {"macd_slow", p.macd_slow},
              {"momentum_lag", p.momentum_lag},
              {"bollinger_window", p.bollinger_window},
              {"bollinger_width", p.bollinger_width}}},
            {"objectives", objectives},
            {"train", train},
            {"architecture",
             {{"gru_units", a.gru_units},
              {"generator_dense", a.generator_dense},
              {"conv_channels", a.conv_channels},
              {"kernel_size", a.kernel_size},
              {"discriminator_dense", a.discriminator_dense},
              {"leaky_slope", a.leaky_slope},
              {"feature_tap", a.feature_tap},
              {"lstm_units", a.lstm_units}}},
            {"out_dir", rc.out_dir.string()},
            {"seed", rc.seed},
            {"render_svg", rc.render_svg}};
}

} // namespace stockgan
