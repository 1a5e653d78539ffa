#include "stockgan/adversarial.hpp"

#include "stockgan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace stockgan {

using nn::Var;

namespace {

constexpr double kLogFloor = 1e-12;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id)};
    return std::mt19937_64(seq);
}

Critic make_critic(const nn::ParamVars& vars, const nn::DiscriminatorConfig& config) {
    return [vars, config](const Var& x) { return nn::discriminator_forward(x, vars, config); };
}

Forecaster make_forecaster(const TrainedModel& model, const nn::ParamVars& vars) {
    if (model.objective == Objective::Lstm) {
        return [vars, cfg = model.lstm_config()](const std::vector<Var>& steps) {
            return nn::lstm_forward(steps, vars, cfg);
        };
    }
    return [vars, cfg = model.generator_config()](const std::vector<Var>& steps) {
        return nn::generator_forward(steps, vars, cfg);
    };
}

Var mean_log(const Var& p) { return mean_all(nn::log(nn::clamp_min(p, kLogFloor))); }

} // namespace

std::string to_string(Objective objective) {
    switch (objective) {
    case Objective::DraganFm: return "dragan_fm";
    case Objective::WganGp: return "wgan_gp";
    case Objective::BasicGan: return "basic_gan";
    case Objective::Lstm: return "lstm";
    }
    return "unknown";
}

Objective parse_objective(const std::string& name) {
    for (Objective o : all_objectives()) {
        if (to_string(o) == name) return o;
    }
    throw ConfigError("unknown objective '" + name + "' (expected dragan_fm, wgan_gp, basic_gan or lstm)");
}

const std::vector<Objective>& all_objectives() {
    static const std::vector<Objective> all = {Objective::DraganFm, Objective::WganGp, Objective::BasicGan,
                                               Objective::Lstm};
    return all;
}

nn::GeneratorConfig ArchitectureConfig::generator(std::size_t window, std::size_t features,
                                                  std::size_t horizon) const {
    nn::GeneratorConfig cfg;
    cfg.window = window;
    cfg.features = features;
    cfg.horizon = horizon;
    cfg.gru_units = gru_units;
    cfg.dense_units = {generator_dense, horizon};
    cfg.leaky_slope = leaky_slope;
    return cfg;
}

nn::DiscriminatorConfig ArchitectureConfig::discriminator(std::size_t window, std::size_t horizon) const {
    nn::DiscriminatorConfig cfg;
    cfg.input_length = window + horizon;
    cfg.conv_channels = conv_channels;
    cfg.kernel_size = kernel_size;
    cfg.dense_units = {discriminator_dense, 1};
    cfg.leaky_slope = leaky_slope;
    cfg.feature_tap = feature_tap;
    return cfg;
}

nn::LstmConfig ArchitectureConfig::lstm(std::size_t window, std::size_t features, std::size_t horizon) const {
    return {window, features, horizon, lstm_units};
}

TrainConfig TrainConfig::preset(Objective objective) {
    TrainConfig cfg;
    cfg.objective = objective;
    if (objective == Objective::WganGp) cfg.d_steps_per_g_step = 5;
    return cfg;
}

void TrainConfig::validate() const {
    if (lambda1 < 0.0 || lambda2 < 0.0 || c < 0.0) {
        throw ConfigError("lambda1, lambda2 and c must be >= 0");
    }
    if (!(k > 0.0)) throw ConfigError("k must be > 0");
    if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
    if (d_steps_per_g_step < 1) throw ConfigError("d_steps_per_g_step must be >= 1");
}

nn::GeneratorConfig TrainedModel::generator_config() const {
    return config.arch.generator(window, features, horizon);
}

nn::LstmConfig TrainedModel::lstm_config() const { return config.arch.lstm(window, features, horizon); }

// ---- loss terms ----

Var critic_scores(const Critic& critic, const Var& x) { return critic(x).score; }

GanLosses basic_gan_losses(const Var& real_scores, const Var& fake_scores) {
    if (real_scores.rows() * real_scores.cols() == 0 || fake_scores.rows() * fake_scores.cols() == 0) {
        throw ShapeError("basic_gan_losses: empty batch");
    }
    const Var p_real = nn::sigmoid(real_scores);
    const Var p_fake = nn::sigmoid(fake_scores);
    const Var one_minus_fake = nn::add_scalar(nn::scale(p_fake, -1.0), 1.0);
    GanLosses out;
    out.d_loss = nn::scale(nn::add(mean_log(p_real), mean_log(one_minus_fake)), -1.0);
    out.g_loss = nn::scale(mean_log(p_fake), -1.0);
    return out;
}

Var wasserstein_core(const Var& real_scores, const Var& fake_scores) {
    return nn::sub(nn::mean_all(fake_scores), nn::mean_all(real_scores));
}

Var gradient_penalty_at(const Critic& critic, const Matrix& points, double lambda, double target) {
    const Var x(points, true);
    const Var total = nn::sum_all(critic(x).score);
    const Var wrt[] = {x};
    // Rows are independent samples, so d(sum of scores)/dx holds each sample's own input gradient.
    const Var g = nn::grad(total, wrt, /*create_graph=*/true).front();
    nn::check_finite(g.value(), "critic input gradient");
    const Var norms = nn::sqrt(nn::row_sum(nn::square(g)));
    return nn::scale(nn::mean_all(nn::square(nn::add_scalar(norms, -target))), lambda);
}

Var gp_wgan(const Critic& critic, const Matrix& real, const Matrix& fake, std::span<const double> eps,
            double lambda1) {
    if (real.rows() != fake.rows() || real.cols() != fake.cols()) {
        throw ShapeError("gp_wgan: real and fake batches differ in shape");
    }
    if (static_cast<Eigen::Index>(eps.size()) != real.rows()) {
        throw ShapeError("gp_wgan: need one interpolation weight per sample");
    }
    Matrix points(real.rows(), real.cols());
    for (Eigen::Index i = 0; i < real.rows(); ++i) {
        const double e = eps[static_cast<std::size_t>(i)];
        points.row(i) = e * real.row(i) + (1.0 - e) * fake.row(i);
    }
    return gradient_penalty_at(critic, points, lambda1, 1.0);
}

Var gp_wgan(const Critic& critic, const Matrix& real, const Matrix& fake, double lambda1, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> eps(static_cast<std::size_t>(real.rows()));
    for (double& e : eps) e = uniform(rng);
    return gp_wgan(critic, real, fake, eps, lambda1);
}

double dragan_noise_sigma(const Matrix& real, double c, NoiseScale mode) {
    if (c < 0.0) throw ParameterError("dragan: c must be >= 0");
    if (mode == NoiseScale::Literal) return std::sqrt(c);
    const double mean = real.mean();
    const double var = (real.array() - mean).square().mean();
    return std::sqrt(c) * std::sqrt(var);
}

Var dragan_penalty(const Critic& critic, const Matrix& real, double lambda1, double k, double c,
                   std::mt19937_64& rng, NoiseScale mode) {
    if (real.rows() == 0) throw ShapeError("dragan_penalty: empty batch");
    const double sigma = dragan_noise_sigma(real, c, mode);
    Matrix points = real;
    if (sigma > 0.0) {
        std::normal_distribution<double> normal(0.0, sigma);
        for (Eigen::Index i = 0; i < points.size(); ++i) points.data()[i] += normal(rng);
    }
    return gradient_penalty_at(critic, points, lambda1, k);
}

Var feature_matching(const Var& real_features, const Var& fake_features, double lambda2) {
    if (real_features.cols() != fake_features.cols()) {
        throw ShapeError("feature_matching: feature widths " + std::to_string(real_features.cols()) + " and " +
                         std::to_string(fake_features.cols()) + " differ");
    }
    const Var real_mean = nn::scale(nn::sum_rows(real_features), 1.0 / static_cast<double>(real_features.rows()));
    const Var fake_mean = nn::scale(nn::sum_rows(fake_features), 1.0 / static_cast<double>(fake_features.rows()));
    return nn::scale(nn::sum_all(nn::square(nn::sub(real_mean, fake_mean))), lambda2);
}

// ---- batches and composite costs ----

Batch make_batch(const SegmentSet& segments, std::span<const std::size_t> indices) {
    if (indices.empty()) throw ShapeError("make_batch: empty batch");
    const auto b = static_cast<Eigen::Index>(indices.size());
    const auto n = static_cast<Eigen::Index>(segments.window);
    const auto m = static_cast<Eigen::Index>(segments.features);
    const auto h = static_cast<Eigen::Index>(segments.horizon);
    std::vector<Matrix> steps(segments.window, Matrix(b, m));
    Batch batch;
    batch.hist.resize(b, n);
    batch.target.resize(b, h);
    for (Eigen::Index i = 0; i < b; ++i) {
        const Segment& seg = segments.segments.at(indices[static_cast<std::size_t>(i)]);
        if (seg.inputs.rows() != n || seg.inputs.cols() != m) throw ShapeError("make_batch: segment shape mismatch");
        for (Eigen::Index t = 0; t < n; ++t) {
            steps[static_cast<std::size_t>(t)].row(i) = seg.inputs.row(t);
            batch.hist(i, t) = seg.hist_closes[static_cast<std::size_t>(t)];
        }
        for (Eigen::Index j = 0; j < h; ++j) {
            batch.target(i, j) = seg.target.empty() ? 0.0 : seg.target[static_cast<std::size_t>(j)];
        }
    }
    for (auto& s : steps) batch.steps.emplace_back(std::move(s));
    return batch;
}

Batch make_batch(const SegmentSet& segments) {
    std::vector<std::size_t> all(segments.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return make_batch(segments, all);
}

Matrix real_inputs(const Batch& batch) {
    Matrix out(batch.hist.rows(), batch.hist.cols() + batch.target.cols());
    out << batch.hist, batch.target;
    return out;
}

Var fake_inputs(const Batch& batch, const Var& prediction) {
    if (prediction.rows() != batch.target.rows() || prediction.cols() != batch.target.cols()) {
        throw ShapeError("fake_inputs: prediction is " + std::to_string(prediction.rows()) + "x" +
                         std::to_string(prediction.cols()) + ", expected " + std::to_string(batch.target.rows()) +
                         "x" + std::to_string(batch.target.cols()));
    }
    return nn::concat_cols(Var(batch.hist), prediction);
}

Var discriminator_cost(const Critic& d, const Forecaster& g, const Batch& batch, const PenaltyParams& penalty,
                       std::mt19937_64& rng) {
    Matrix prediction;
    {
        nn::NoGradGuard no_grad;
        prediction = g(batch.steps).value();
    }
    const Matrix real = real_inputs(batch);
    const Var real_scores = d(Var(real)).score;
    const Var fake_scores = d(fake_inputs(batch, Var(prediction))).score;
    return nn::add(wasserstein_core(real_scores, fake_scores),
                   dragan_penalty(d, real, penalty.lambda1, penalty.k, penalty.c, rng, penalty.noise_scale));
}

Var generator_cost(const Critic& d, const Forecaster& g, const Batch& batch, double lambda2) {
    const Var prediction = g(batch.steps);
    const auto fake = d(fake_inputs(batch, prediction));
    const auto real = d(Var(real_inputs(batch)));
    return nn::add(nn::scale(nn::mean_all(fake.score), -1.0), feature_matching(real.features, fake.features, lambda2));
}

Var objective_d_cost(Objective objective, const Critic& d, const Matrix& prediction, const Batch& batch,
                     const TrainConfig& config, std::mt19937_64& rng) {
    const Matrix real = real_inputs(batch);
    const Var fake = fake_inputs(batch, Var(prediction));
    const Var real_scores = d(Var(real)).score;
    const Var fake_scores = d(fake).score;
    switch (objective) {
    case Objective::DraganFm:
        return nn::add(wasserstein_core(real_scores, fake_scores),
                       dragan_penalty(d, real, config.lambda1, config.k, config.c, rng, config.noise_scale));
    case Objective::WganGp:
        return nn::add(wasserstein_core(real_scores, fake_scores),
                       gp_wgan(d, real, fake.value(), config.lambda1, rng));
    case Objective::BasicGan:
        return basic_gan_losses(real_scores, fake_scores).d_loss;
    case Objective::Lstm:
        break;
    }
    throw ConfigError("objective " + to_string(objective) + " has no discriminator");
}

Var objective_g_cost(Objective objective, const Critic& d, const Var& prediction, const Batch& batch,
                     const TrainConfig& config) {
    switch (objective) {
    case Objective::DraganFm: {
        const auto fake = d(fake_inputs(batch, prediction));
        const auto real = d(Var(real_inputs(batch)));
        return nn::add(nn::scale(nn::mean_all(fake.score), -1.0),
                       feature_matching(real.features, fake.features, config.lambda2));
    }
    case Objective::WganGp:
        return nn::scale(nn::mean_all(d(fake_inputs(batch, prediction)).score), -1.0);
    case Objective::BasicGan: {
        const Var fake_scores = d(fake_inputs(batch, prediction)).score;
        return nn::scale(mean_log(nn::sigmoid(fake_scores)), -1.0);
    }
    case Objective::Lstm:
        return nn::mean_all(nn::square(nn::sub(prediction, Var(batch.target))));
    }
    throw ConfigError("unknown objective");
}

// ---- training ----

TrainedModel initial_model(const SegmentSet& segments, const TrainConfig& config, const Normalizer& normalizer) {
    config.validate();
    TrainedModel model;
    model.objective = config.objective;
    model.config = config;
    model.window = segments.window;
    model.horizon = segments.horizon;
    model.features = segments.features;
    model.normalizer = normalizer;
    auto rng = stream(config.seed, 1);
    model.params = config.objective == Objective::Lstm ? nn::init_lstm(model.lstm_config(), rng)
                                                       : nn::init_generator(model.generator_config(), rng);
    return model;
}

namespace {

std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t> order, std::size_t batch_size) {
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
        // A trailing singleton cannot form batch means; fold it into the previous batch.
        if (b.size() < 2 && !batches.empty()) {
            batches.back().insert(batches.back().end(), b.begin(), b.end());
        } else {
            batches.push_back(std::move(b));
        }
    }
    return batches;
}

double price_rmse(const TrainedModel& model, const SegmentSet& segments) {
    const Matrix pred = predict(model, segments);
    double ss = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        for (std::size_t h = 0; h < segments.horizon; ++h) {
            const double real = denormalize_close(segments.segments[i].target[h], model.normalizer);
            const double guess = denormalize_close(pred(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)),
                                                   model.normalizer);
            ss += (real - guess) * (real - guess);
            ++n;
        }
    }
    return std::sqrt(ss / static_cast<double>(n));
}

template <typename Fn>
nn::ValueAndGrad guarded_step(Fn&& fn, std::size_t epoch, std::size_t batch, const char* loss_name) {
    try {
        return fn();
    } catch (const NumericError& e) {
        throw TrainingError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ", " +
                            loss_name + ": " + e.what());
    }
}

} // namespace

TrainedModel train(const SegmentSet& segments, const TrainConfig& config, const Normalizer& normalizer,
                   const EpochObserver& observer) {
    if (segments.empty()) throw InsufficientDataError("train: no segments");
    if (segments.size() < 2) throw InsufficientDataError("train: need at least two segments for a batch");
    TrainedModel model = initial_model(segments, config, normalizer);
    const bool adversarial = config.objective != Objective::Lstm;

    auto disc_rng = stream(config.seed, 2);
    auto shuffle_rng = stream(config.seed, 3);
    auto noise_rng = stream(config.seed, 4);

    const nn::DiscriminatorConfig disc_cfg = config.arch.discriminator(segments.window, segments.horizon);
    nn::ModelParams disc = adversarial ? nn::init_discriminator(disc_cfg, disc_rng) : nn::ModelParams{};
    nn::AdamState g_state = nn::make_adam_state(model.params);
    nn::AdamState d_state = nn::make_adam_state(disc);
    const nn::AdamOptions adam{config.lr, config.beta1, config.beta2, 1e-8};
    std::int64_t g_t = 0;
    std::int64_t d_t = 0;

    std::vector<std::size_t> order(segments.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const auto batches = make_batches(order, config.batch_size);
        double d_sum = 0.0;
        double g_sum = 0.0;
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            const Batch batch = make_batch(segments, batches[bi]);
            if (adversarial) {
                for (std::size_t s = 0; s < config.d_steps_per_g_step; ++s) {
                    Matrix prediction;
                    {
                        nn::NoGradGuard no_grad;
                        const nn::ParamVars gv(model.params, false);
                        prediction = make_forecaster(model, gv)(batch.steps).value();
                    }
                    const auto step = guarded_step(
                        [&] {
                            return nn::value_and_grad(
                                [&](const nn::ParamVars& dv) {
                                    return objective_d_cost(config.objective, make_critic(dv, disc_cfg), prediction,
                                                            batch, config, noise_rng);
                                },
                                disc);
                        },
                        epoch, bi, "d_loss");
                    nn::adam_step(disc, step.grads, d_state, ++d_t, adam);
                    if (s + 1 == config.d_steps_per_g_step) d_sum += step.loss;
                }
            }
            const nn::ParamVars dv(disc, false);
            const Critic critic = adversarial ? make_critic(dv, disc_cfg) : Critic{};
            const auto step = guarded_step(
                [&] {
                    return nn::value_and_grad(
                        [&](const nn::ParamVars& gv) {
                            const Var prediction = make_forecaster(model, gv)(batch.steps);
                            return objective_g_cost(config.objective, critic, prediction, batch, config);
                        },
                        model.params);
                },
                epoch, bi, "g_loss");
            nn::adam_step(model.params, step.grads, g_state, ++g_t, adam);
            g_sum += step.loss;
        }
        const auto nb = static_cast<double>(batches.size());
        EpochRecord record{epoch, adversarial ? d_sum / nb : 0.0, g_sum / nb, price_rmse(model, segments)};
        if (!std::isfinite(record.train_rmse)) {
            throw TrainingError("epoch " + std::to_string(epoch) + ": non-finite train_rmse");
        }
        model.history.push_back(record);
        if (observer) observer(model);
    }
    return model;
}

Matrix predict(const TrainedModel& model, const SegmentSet& segments) {
    if (segments.window != model.window || segments.features != model.features) {
        throw ShapeError("predict: segments are " + std::to_string(segments.window) + "x" +
                         std::to_string(segments.features) + ", model expects " + std::to_string(model.window) +
                         "x" + std::to_string(model.features));
    }
    if (segments.empty()) return Matrix(0, static_cast<Eigen::Index>(model.horizon));
    nn::NoGradGuard no_grad;
    const nn::ParamVars vars(model.params, false);
    return make_forecaster(model, vars)(make_batch(segments).steps).value();
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
    out << "epoch,d_loss,g_loss,train_rmse\n";
    for (const auto& r : history) {
        out << r.epoch << ',' << format_double(r.d_loss) << ',' << format_double(r.g_loss) << ','
            << format_double(r.train_rmse) << '\n';
    }
}

// ---- persistence ----

namespace {

nn::Checkpoint to_checkpoint_impl(const TrainedModel& model) {
    const auto& cfg = model.config;
    const auto& arch = cfg.arch;
    nlohmann::json meta;
    meta["kind"] = "stockgan-forecaster";
    meta["objective"] = to_string(model.objective);
    meta["window"] = model.window;
    meta["horizon"] = model.horizon;
    meta["features"] = model.features;
    meta["seed"] = cfg.seed;
    meta["train"] = {{"lambda1", cfg.lambda1},
                     {"lambda2", cfg.lambda2},
                     {"k", cfg.k},
                     {"c", cfg.c},
                     {"noise_scale", cfg.noise_scale == NoiseScale::Literal ? "literal" : "batch_std"},
                     {"lr", cfg.lr},
                     {"beta1", cfg.beta1},
                     {"beta2", cfg.beta2},
                     {"batch_size", cfg.batch_size},
                     {"epochs", cfg.epochs},
                     {"d_steps_per_g_step", cfg.d_steps_per_g_step}};
    meta["architecture"] = {{"gru_units", arch.gru_units},
                            {"generator_dense", arch.generator_dense},
                            {"conv_channels", arch.conv_channels},
                            {"kernel_size", arch.kernel_size},
                            {"discriminator_dense", arch.discriminator_dense},
                            {"leaky_slope", arch.leaky_slope},
                            {"feature_tap", arch.feature_tap},
                            {"lstm_units", arch.lstm_units}};
    std::vector<int> degenerate;
    for (bool d : model.normalizer.degenerate) degenerate.push_back(d ? 1 : 0);
    meta["normalizer"] = {{"min", model.normalizer.per_feature_min},
                          {"max", model.normalizer.per_feature_max},
                          {"degenerate", degenerate},
                          {"fitted_on", model.normalizer.fitted_on},
                          {"close_column", model.normalizer.close_column}};
    nlohmann::json history = nlohmann::json::array();
    for (const auto& r : model.history) {
        history.push_back({{"epoch", r.epoch}, {"d_loss", r.d_loss}, {"g_loss", r.g_loss}, {"train_rmse", r.train_rmse}});
    }
    meta["history"] = history;
    return {model.params, meta};
}

} // namespace

nn::Checkpoint to_checkpoint(const TrainedModel& model) { return to_checkpoint_impl(model); }

TrainedModel from_checkpoint(const nn::Checkpoint& checkpoint) {
    const auto& meta = checkpoint.metadata;
    try {
        if (meta.value("kind", "") != "stockgan-forecaster") {
            throw FormatError("checkpoint does not hold a forecaster");
        }
        TrainedModel model;
        model.objective = parse_objective(meta.at("objective").get<std::string>());
        model.window = meta.at("window").get<std::size_t>();
        model.horizon = meta.at("horizon").get<std::size_t>();
        model.features = meta.at("features").get<std::size_t>();
        auto& cfg = model.config;
        cfg.objective = model.objective;
        cfg.seed = meta.at("seed").get<std::uint64_t>();
        const auto& t = meta.at("train");
        cfg.lambda1 = t.at("lambda1").get<double>();
        cfg.lambda2 = t.at("lambda2").get<double>();
        cfg.k = t.at("k").get<double>();
        cfg.c = t.at("c").get<double>();
        cfg.noise_scale = t.at("noise_scale").get<std::string>() == "literal" ? NoiseScale::Literal
                                                                               : NoiseScale::BatchStd;
        cfg.lr = t.at("lr").get<double>();
        cfg.beta1 = t.at("beta1").get<double>();
        cfg.beta2 = t.at("beta2").get<double>();
        cfg.batch_size = t.at("batch_size").get<std::size_t>();
        cfg.epochs = t.at("epochs").get<std::size_t>();
        cfg.d_steps_per_g_step = t.at("d_steps_per_g_step").get<std::size_t>();
        const auto& a = meta.at("architecture");
        cfg.arch.gru_units = a.at("gru_units").get<std::vector<std::size_t>>();
        cfg.arch.generator_dense = a.at("generator_dense").get<std::size_t>();
        cfg.arch.conv_channels = a.at("conv_channels").get<std::vector<std::size_t>>();
        cfg.arch.kernel_size = a.at("kernel_size").get<std::size_t>();
        cfg.arch.discriminator_dense = a.at("discriminator_dense").get<std::size_t>();
        cfg.arch.leaky_slope = a.at("leaky_slope").get<double>();
        cfg.arch.feature_tap = a.at("feature_tap").get<std::string>();
        cfg.arch.lstm_units = a.at("lstm_units").get<std::size_t>();
        const auto& n = meta.at("normalizer");
        model.normalizer.per_feature_min = n.at("min").get<std::vector<double>>();
        model.normalizer.per_feature_max = n.at("max").get<std::vector<double>>();
        for (int d : n.at("degenerate").get<std::vector<int>>()) model.normalizer.degenerate.push_back(d != 0);
        model.normalizer.fitted_on = n.at("fitted_on").get<std::string>();
        model.normalizer.close_column = n.at("close_column").get<std::size_t>();
        for (const auto& r : meta.at("history")) {
            model.history.push_back({r.at("epoch").get<std::size_t>(), r.at("d_loss").get<double>(),
                                     r.at("g_loss").get<double>(), r.at("train_rmse").get<double>()});
        }
        model.params = checkpoint.params;

        // Shapes must agree with what the recorded architecture would build.
        auto rng = stream(0, 0);
        const nn::ModelParams expected = model.objective == Objective::Lstm
                                             ? nn::init_lstm(model.lstm_config(), rng)
                                             : nn::init_generator(model.generator_config(), rng);
        if (expected.size() != model.params.size()) throw FormatError("checkpoint parameter count mismatch");
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const auto& [en, em] = expected.entries()[i];
            const auto& [gn, gm] = model.params.entries()[i];
            if (en != gn || em.rows() != gm.rows() || em.cols() != gm.cols()) {
                throw FormatError("checkpoint tensor '" + gn + "' does not match architecture");
            }
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint metadata: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    nn::save_checkpoint(path, to_checkpoint(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return from_checkpoint(nn::load_checkpoint(path)); }

} // namespace stockgan
