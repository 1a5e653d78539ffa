#pragma once

#include "stockgan/adversarial.hpp"
#include "stockgan/indicators.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stockgan {

// Everything a pipeline run needs. Loaded from a JSON document; keys not
// present keep the defaults below.
struct RunConfig {
    std::filesystem::path data_path;
    std::string stock; // defaults to the data file stem
    double train_fraction = 0.7;
    std::size_t window = 3;
    std::vector<std::size_t> horizons{1};
    IndicatorParams indicators;
    std::vector<Objective> objectives = all_objectives();
    TrainConfig train; // objective and seed are filled per run
    // Unset: 1, or 5 for wgan_gp.
    std::optional<std::size_t> d_steps_per_g_step;
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 42;
    bool render_svg = true;

    std::string stock_name() const;
    TrainConfig train_config(Objective objective) const;
    void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

} // namespace stockgan
