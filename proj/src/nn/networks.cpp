#include "stockgan/nn/networks.hpp"

#include "stockgan/errors.hpp"

namespace stockgan::nn {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

void require_window(const std::vector<Var>& steps, std::size_t window, std::size_t features,
                    const char* who) {
    if (steps.size() != window) {
        throw ShapeError(std::string(who) + ": expected " + std::to_string(window) + " time steps, got " +
                         std::to_string(steps.size()));
    }
    for (const auto& s : steps) {
        if (static_cast<std::size_t>(s.cols()) != features) {
            throw ShapeError(std::string(who) + ": expected " + std::to_string(features) +
                             " features per step, got " + std::to_string(s.cols()));
        }
    }
}

} // namespace

void GeneratorConfig::validate() const {
    if (window < 1 || features < 1 || horizon < 1) throw ParameterError("generator: dims must be >= 1");
    if (gru_units.size() != 2 || gru_units[0] < 1 || gru_units[1] < 1) {
        throw ParameterError("generator: exactly two GRU layers with >= 1 unit are required");
    }
    if (dense_units.size() != 2 || dense_units[0] < 1) {
        throw ParameterError("generator: exactly two dense layers are required");
    }
    if (dense_units.back() != horizon) {
        throw ParameterError("generator: last dense width " + std::to_string(dense_units.back()) +
                             " must equal horizon " + std::to_string(horizon));
    }
}

void DiscriminatorConfig::validate() const {
    if (input_length < 1) throw ParameterError("discriminator: input_length must be >= 1");
    if (conv_channels.size() != 3) throw ParameterError("discriminator: exactly three conv layers are required");
    if (kernel_size < 1) throw ParameterError("discriminator: kernel_size must be >= 1");
    if (dense_units.size() != 2 || dense_units.back() != 1) {
        throw ParameterError("discriminator: two dense layers ending in width 1 are required");
    }
    if (feature_tap != "conv1" && feature_tap != "conv2" && feature_tap != "conv3" && feature_tap != "dense1") {
        throw ParameterError("discriminator: unknown feature tap '" + feature_tap + "'");
    }
}

void LstmConfig::validate() const {
    if (window < 1 || features < 1 || horizon < 1 || units < 1) {
        throw ParameterError("lstm: dims must be >= 1");
    }
}

ModelParams init_generator(const GeneratorConfig& config, std::mt19937_64& rng) {
    config.validate();
    ModelParams p;
    const auto u1 = idx(config.gru_units[0]);
    const auto u2 = idx(config.gru_units[1]);
    const auto d1 = idx(config.dense_units[0]);
    const auto out = idx(config.horizon);
    add_gru_params(p, "gru1", idx(config.features), u1, rng);
    add_gru_params(p, "gru2", u1, u2, rng);
    p.add("dense1.W", init_uniform(u2, d1, u2, rng));
    p.add("dense1.b", init_uniform(1, d1, u2, rng));
    p.add("dense2.W", init_uniform(d1, out, d1, rng));
    p.add("dense2.b", init_uniform(1, out, d1, rng));
    return p;
}

ModelParams init_discriminator(const DiscriminatorConfig& config, std::mt19937_64& rng) {
    config.validate();
    ModelParams p;
    const auto k = idx(config.kernel_size);
    Eigen::Index in = 1;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto out = idx(config.conv_channels[i]);
        const std::string name = "conv" + std::to_string(i + 1);
        p.add(name + ".kernel", init_uniform(k * in, out, k * in, rng));
        p.add(name + ".bias", init_uniform(1, out, k * in, rng));
        in = out;
    }
    const Eigen::Index flat = idx(config.input_length) * in;
    const auto d1 = idx(config.dense_units[0]);
    p.add("dense1.W", init_uniform(flat, d1, flat, rng));
    p.add("dense1.b", init_uniform(1, d1, flat, rng));
    p.add("dense2.W", init_uniform(d1, 1, d1, rng));
    p.add("dense2.b", init_uniform(1, 1, d1, rng));
    return p;
}

ModelParams init_lstm(const LstmConfig& config, std::mt19937_64& rng) {
    config.validate();
    ModelParams p;
    const auto u = idx(config.units);
    add_lstm_params(p, "lstm_fwd", idx(config.features), u, rng);
    add_lstm_params(p, "lstm_bwd", idx(config.features), u, rng);
    p.add("dense.W", init_uniform(2 * u, idx(config.horizon), 2 * u, rng));
    p.add("dense.b", init_uniform(1, idx(config.horizon), 2 * u, rng));
    return p;
}

Var generator_forward(const std::vector<Var>& steps, const ParamVars& params, const GeneratorConfig& config) {
    require_window(steps, config.window, config.features, "generator");
    const Eigen::Index batch = steps.front().rows();
    const Var h1(Matrix::Zero(batch, idx(config.gru_units[0])));
    const Var h2(Matrix::Zero(batch, idx(config.gru_units[1])));
    const auto seq1 = gru_sequence(steps, params, "gru1", h1);
    const auto seq2 = gru_sequence(seq1, params, "gru2", h2);
    const Var hidden = leaky_relu(dense(seq2.back(), params["dense1.W"], params["dense1.b"]), config.leaky_slope);
    return dense(hidden, params["dense2.W"], params["dense2.b"]);
}

Var lstm_forward(const std::vector<Var>& steps, const ParamVars& params, const LstmConfig& config) {
    require_window(steps, config.window, config.features, "lstm");
    const auto fwd = lstm_sequence(steps, params, "lstm_fwd", false);
    const auto bwd = lstm_sequence(steps, params, "lstm_bwd", true);
    const Var last = concat_cols(fwd.back(), bwd.front());
    return dense(last, params["dense.W"], params["dense.b"]);
}

CriticOutput discriminator_forward(const Var& x, const ParamVars& params, const DiscriminatorConfig& config) {
    const auto length = idx(config.input_length);
    if (x.cols() != length) {
        throw ShapeError("discriminator: input length " + std::to_string(x.cols()) + " != " +
                         std::to_string(length));
    }
    const Eigen::Index batch = x.rows();
    const auto k = idx(config.kernel_size);
    const auto act = Activation::leaky_relu(config.leaky_slope);

    CriticOutput out;
    Var h = reshape(x, batch * length, 1);
    for (int i = 1; i <= 3; ++i) {
        const std::string name = "conv" + std::to_string(i);
        h = conv1d(h, params[name + ".kernel"], params[name + ".bias"], length, k, act);
        if (config.feature_tap == name) out.features = reshape(h, batch, length * h.cols());
    }
    const Var flat = reshape(h, batch, length * h.cols());
    const Var hidden = leaky_relu(dense(flat, params["dense1.W"], params["dense1.b"]), config.leaky_slope);
    if (config.feature_tap == "dense1") out.features = hidden;
    out.score = dense(hidden, params["dense2.W"], params["dense2.b"]);
    return out;
}

namespace {

std::vector<double> row_vector(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

} // namespace

std::vector<double> generator_forward(const Matrix& window, const ModelParams& params,
                                      const GeneratorConfig& config) {
    NoGradGuard no_grad;
    const ParamVars vars(params, false);
    return row_vector(generator_forward(rows_as_steps(window), vars, config).value());
}

std::vector<double> lstm_forward(const Matrix& window, const ModelParams& params, const LstmConfig& config) {
    NoGradGuard no_grad;
    const ParamVars vars(params, false);
    return row_vector(lstm_forward(rows_as_steps(window), vars, config).value());
}

CriticResult discriminator_forward(const std::vector<double>& x, const ModelParams& params,
                                   const DiscriminatorConfig& config) {
    NoGradGuard no_grad;
    const ParamVars vars(params, false);
    const Matrix input = Eigen::Map<const Matrix>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
    const auto out = discriminator_forward(Var(input), vars, config);
    return {out.score.item(), row_vector(out.features.value())};
}

} // namespace stockgan::nn
