#pragma once

#include "stockgan/nn/layers.hpp"
#include "stockgan/nn/params.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stockgan::nn {

// Two stacked GRUs, last hidden state, two dense layers. The final dense
// layer is linear and has `horizon` outputs.
struct GeneratorConfig {
    std::size_t window = 3;
    std::size_t features = 14;
    std::size_t horizon = 1;
    std::vector<std::size_t> gru_units{256, 128};
    std::vector<std::size_t> dense_units{64, 1};
    double leaky_slope = 0.2;

    void validate() const;
};

// Three same-padded convolutions, flatten, two dense layers ending in one
// unbounded score.
struct DiscriminatorConfig {
    std::size_t input_length = 4;
    std::vector<std::size_t> conv_channels{32, 64, 128};
    std::size_t kernel_size = 3;
    std::vector<std::size_t> dense_units{64, 1};
    double leaky_slope = 0.2;
    // One of conv1, conv2, conv3, dense1.
    std::string feature_tap = "conv3";

    void validate() const;
};

// Bidirectional LSTM over the window, final state of each direction
// concatenated, one dense layer to `horizon` outputs.
struct LstmConfig {
    std::size_t window = 3;
    std::size_t features = 14;
    std::size_t horizon = 1;
    std::size_t units = 128;

    void validate() const;
};

ModelParams init_generator(const GeneratorConfig& config, std::mt19937_64& rng);
ModelParams init_discriminator(const DiscriminatorConfig& config, std::mt19937_64& rng);
ModelParams init_lstm(const LstmConfig& config, std::mt19937_64& rng);

// steps[t] is B x features; returns B x horizon.
Var generator_forward(const std::vector<Var>& steps, const ParamVars& params, const GeneratorConfig& config);
Var lstm_forward(const std::vector<Var>& steps, const ParamVars& params, const LstmConfig& config);

struct CriticOutput {
    Var score;    // B x 1
    Var features; // B x F, flattened output of the tap layer
};

// x is B x input_length.
CriticOutput discriminator_forward(const Var& x, const ParamVars& params, const DiscriminatorConfig& config);

// Single-sample conveniences.
std::vector<double> generator_forward(const Matrix& window, const ModelParams& params,
                                      const GeneratorConfig& config);
std::vector<double> lstm_forward(const Matrix& window, const ModelParams& params, const LstmConfig& config);

struct CriticResult {
    double score = 0.0;
    std::vector<double> features;
};
CriticResult discriminator_forward(const std::vector<double>& x, const ModelParams& params,
                                   const DiscriminatorConfig& config);

} // namespace stockgan::nn
