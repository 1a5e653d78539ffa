#pragma once

#include "stockgan/market_data.hpp"
#include "stockgan/nn/checkpoint.hpp"
#include "stockgan/nn/networks.hpp"
#include "stockgan/nn/optim.hpp"
#include "stockgan/windowing.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace stockgan {

enum class Objective { DraganFm, WganGp, BasicGan, Lstm };

std::string to_string(Objective objective);
Objective parse_objective(const std::string& name);
const std::vector<Objective>& all_objectives();

// How the DRAGAN noise scale c is read. BatchStd: sigma = sqrt(c) * std(real batch).
// Literal: delta ~ N(0, c I), i.e. sigma = sqrt(c).
enum class NoiseScale { BatchStd, Literal };

struct ArchitectureConfig {
    std::vector<std::size_t> gru_units{256, 128};
    std::size_t generator_dense = 64;
    std::vector<std::size_t> conv_channels{32, 64, 128};
    std::size_t kernel_size = 3;
    std::size_t discriminator_dense = 64;
    double leaky_slope = 0.2;
    std::string feature_tap = "conv3";
    std::size_t lstm_units = 128;

    nn::GeneratorConfig generator(std::size_t window, std::size_t features, std::size_t horizon) const;
    nn::DiscriminatorConfig discriminator(std::size_t window, std::size_t horizon) const;
    nn::LstmConfig lstm(std::size_t window, std::size_t features, std::size_t horizon) const;
};

struct TrainConfig {
    Objective objective = Objective::DraganFm;
    double lambda1 = 10.0;  // DRAGAN / GP weight
    double lambda2 = 1.0;   // feature-matching weight
    double k = 1.0;         // target gradient norm
    double c = 10.0;        // DRAGAN noise variance scale
    NoiseScale noise_scale = NoiseScale::BatchStd;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::size_t batch_size = 64;
    std::size_t epochs = 200;
    std::size_t d_steps_per_g_step = 1;
    std::uint64_t seed = 42;
    ArchitectureConfig arch;

    // Defaults for an objective; WGAN-GP runs five critic steps per generator step.
    static TrainConfig preset(Objective objective);
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double train_rmse = 0.0;
};

struct TrainedModel {
    Objective objective = Objective::DraganFm;
    TrainConfig config;
    std::size_t window = 0;
    std::size_t horizon = 0;
    std::size_t features = 0;
    // GRU generator weights, or the bidirectional LSTM for Objective::Lstm.
    nn::ModelParams params;
    Normalizer normalizer;
    std::vector<EpochRecord> history;

    nn::GeneratorConfig generator_config() const;
    nn::LstmConfig lstm_config() const;
};

// ---- loss terms ----

using Critic = std::function<nn::CriticOutput(const nn::Var& x)>;
using Forecaster = std::function<nn::Var(const std::vector<nn::Var>& steps)>;

nn::Var critic_scores(const Critic& critic, const nn::Var& x);

struct GanLosses {
    nn::Var d_loss;
    nn::Var g_loss;
};

// Scores are pre-sigmoid. d = -mean log p_real - mean log(1 - p_fake);
// g = -mean log p_fake. Logs are clamped at 1e-12.
GanLosses basic_gan_losses(const nn::Var& real_scores, const nn::Var& fake_scores);

// mean(fake) - mean(real)
nn::Var wasserstein_core(const nn::Var& real_scores, const nn::Var& fake_scores);

// lambda * mean_i (||grad_x D(x_i)||_2 - target)^2, differentiable with
// respect to whatever the critic depends on.
nn::Var gradient_penalty_at(const Critic& critic, const Matrix& points, double lambda, double target);

// WGAN-GP: points eps*real + (1-eps)*fake with eps ~ U[0,1] per sample.
nn::Var gp_wgan(const Critic& critic, const Matrix& real, const Matrix& fake, double lambda1, std::mt19937_64& rng);
nn::Var gp_wgan(const Critic& critic, const Matrix& real, const Matrix& fake, std::span<const double> eps,
                double lambda1);

double dragan_noise_sigma(const Matrix& real, double c, NoiseScale mode);

// DRAGAN: points real + delta, delta ~ N(0, sigma^2 I).
nn::Var dragan_penalty(const Critic& critic, const Matrix& real, double lambda1, double k, double c,
                       std::mt19937_64& rng, NoiseScale mode = NoiseScale::BatchStd);

// lambda2 * ||mean(real_features) - mean(fake_features)||^2
nn::Var feature_matching(const nn::Var& real_features, const nn::Var& fake_features, double lambda2);

// ---- batches and composite costs ----

struct Batch {
    std::vector<nn::Var> steps; // N entries of B x M
    Matrix hist;                // B x N normalized closes
    Matrix target;              // B x H
    std::size_t size() const { return static_cast<std::size_t>(hist.rows()); }
};

Batch make_batch(const SegmentSet& segments, std::span<const std::size_t> indices);
Batch make_batch(const SegmentSet& segments);

// hist ++ target, B x (N+H)
Matrix real_inputs(const Batch& batch);
// hist ++ prediction, differentiable in the prediction.
nn::Var fake_inputs(const Batch& batch, const nn::Var& prediction);

struct PenaltyParams {
    double lambda1 = 10.0;
    double k = 1.0;
    double c = 10.0;
    NoiseScale noise_scale = NoiseScale::BatchStd;
};

// Wasserstein term plus DRAGAN penalty at perturbed real inputs. The
// generator output is treated as a constant.
nn::Var discriminator_cost(const Critic& d, const Forecaster& g, const Batch& batch, const PenaltyParams& penalty,
                           std::mt19937_64& rng);

// -mean D(X_fake) + lambda2 * feature matching of the critic tap.
nn::Var generator_cost(const Critic& d, const Forecaster& g, const Batch& batch, double lambda2);

// Per-objective costs used by the training loop.
nn::Var objective_d_cost(Objective objective, const Critic& d, const Matrix& prediction, const Batch& batch,
                         const TrainConfig& config, std::mt19937_64& rng);
nn::Var objective_g_cost(Objective objective, const Critic& d, const nn::Var& prediction, const Batch& batch,
                         const TrainConfig& config);

// ---- training ----

using EpochObserver = std::function<void(const TrainedModel& model)>;

TrainedModel initial_model(const SegmentSet& segments, const TrainConfig& config, const Normalizer& normalizer);

// Alternating Adam updates (or MSE regression for Objective::Lstm). The
// observer, if set, runs after every completed epoch.
TrainedModel train(const SegmentSet& segments, const TrainConfig& config, const Normalizer& normalizer,
                   const EpochObserver& observer = {});

// One row per segment, H normalized values each.
Matrix predict(const TrainedModel& model, const SegmentSet& segments);

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

nn::Checkpoint to_checkpoint(const TrainedModel& model);
TrainedModel from_checkpoint(const nn::Checkpoint& checkpoint);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace stockgan
